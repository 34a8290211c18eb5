//! Python bindings for `archrefit_core`.

use pyo3::prelude::*;

#[pymodule]
mod archrefit {
    use archrefit_core::fitness::{check_conformance, LayeredAssignment};
    use archrefit_core::lab::{self, FixtureSpec, InjectionPlan};
    use archrefit_core::report::violations_text;
    use archrefit_core::{
        self as core, unit_dependency_graph, MigrationConfig, ReconstructionConfig,
    };
    use pyo3::exceptions::PyValueError;
    use pyo3::prelude::*;

    fn err(e: impl ToString) -> PyErr {
        PyValueError::new_err(e.to_string())
    }

    fn reconstruction_config(
        max_layers: usize,
        restarts: usize,
        seed: u64,
        factor_resolvable: f64,
        factor_unresolvable: f64,
    ) -> ReconstructionConfig {
        ReconstructionConfig {
            max_layers,
            restarts,
            seed,
            factor_resolvable,
            factor_unresolvable,
            ..ReconstructionConfig::default()
        }
    }

    /// A validated code model.
    #[pyclass(frozen, eq, from_py_object)]
    #[derive(Clone, PartialEq)]
    pub struct CodeModel {
        inner: core::CodeModel,
    }

    #[pymethods]
    impl CodeModel {
        /// Parses and validates a model document.
        #[staticmethod]
        fn from_json(text: &str) -> PyResult<Self> {
            core::load_model(text)
                .map(|inner| CodeModel { inner })
                .map_err(err)
        }

        fn to_json(&self) -> String {
            self.inner.to_json()
        }

        fn unit_names(&self) -> Vec<String> {
            self.inner.unit_names()
        }

        /// `(from, to, weight)` for every inter-unit dependency.
        fn edges(&self) -> Vec<(String, String, f64)> {
            unit_dependency_graph(&self.inner)
                .edges
                .into_iter()
                .map(|e| (e.from_unit, e.to_unit, e.weight))
                .collect()
        }

        fn to_dot(&self) -> String {
            unit_dependency_graph(&self.inner).to_dot()
        }

        fn __len__(&self) -> usize {
            self.inner.units.len()
        }

        fn __repr__(&self) -> String {
            format!("CodeModel(units={})", self.inner.units.len())
        }
    }

    /// Units grouped into layers; layer 1 is the bottom.
    #[pyclass(frozen, eq, from_py_object)]
    #[derive(Clone, PartialEq)]
    pub struct Architecture {
        inner: LayeredAssignment,
    }

    #[pymethods]
    impl Architecture {
        #[new]
        #[pyo3(signature = (layers, max_layers = 3))]
        fn new(layers: Vec<Vec<String>>, max_layers: usize) -> PyResult<Self> {
            LayeredAssignment::from_layers(layers, max_layers)
                .map(|inner| Architecture { inner })
                .map_err(err)
        }

        #[staticmethod]
        #[pyo3(signature = (text, max_layers = 3))]
        fn from_json(text: &str, max_layers: usize) -> PyResult<Self> {
            LayeredAssignment::from_json(text, max_layers)
                .map(|inner| Architecture { inner })
                .map_err(err)
        }

        fn to_json(&self) -> String {
            self.inner.to_json()
        }

        #[getter]
        fn layers(&self) -> Vec<Vec<String>> {
            self.inner.layers().to_vec()
        }

        fn layer_of(&self, unit: &str) -> Option<usize> {
            self.inner.layer_of(unit)
        }

        fn __len__(&self) -> usize {
            self.inner.layer_count()
        }

        fn __repr__(&self) -> String {
            format!("Architecture({:?})", self.inner.layers())
        }
    }

    /// A reconstructed architecture with its violations and quality.
    #[pyclass(frozen)]
    pub struct Reflexion {
        #[pyo3(get)]
        architecture: Architecture,
        #[pyo3(get)]
        violations: usize,
        #[pyo3(get)]
        quality: f64,
        /// `(from, to, weight, classification)` for every violating edge.
        #[pyo3(get)]
        violating_edges: Vec<(String, String, f64, String)>,
    }

    #[pymethods]
    impl Reflexion {
        fn __repr__(&self) -> String {
            format!(
                "Reflexion(layers={}, violations={}, quality={:.5})",
                self.architecture.inner.layer_count(),
                self.violations,
                self.quality
            )
        }
    }

    fn violating_edges(
        report: &archrefit_core::ViolationReport,
    ) -> Vec<(String, String, f64, String)> {
        report
            .violations()
            .map(|v| {
                let class = match v.classification {
                    Some(core::Classification::ResolvableViolation) => "resolvable",
                    _ => "unresolvable",
                };
                (v.from.clone(), v.to.clone(), v.weight, class.to_string())
            })
            .collect()
    }

    /// Outcome of a migration run.
    #[pyclass(frozen)]
    pub struct Migration {
        #[pyo3(get)]
        model: CodeModel,
        #[pyo3(get)]
        violation_sequence: Vec<usize>,
        #[pyo3(get)]
        transformations: Vec<String>,
        #[pyo3(get)]
        ledger_checks: usize,
        table: String,
    }

    #[pymethods]
    impl Migration {
        fn table(&self) -> String {
            self.table.clone()
        }

        fn __repr__(&self) -> String {
            format!("Migration(violations={:?})", self.violation_sequence)
        }
    }

    #[pyfunction]
    fn load_model(text: &str) -> PyResult<CodeModel> {
        CodeModel::from_json(text)
    }

    /// Searches a layered architecture for `model`.
    #[pyfunction]
    #[pyo3(signature = (model, max_layers = 3, restarts = 5, seed = 0, factor_resolvable = 0.25, factor_unresolvable = 2.0))]
    fn reconstruct(
        model: &CodeModel,
        max_layers: usize,
        restarts: usize,
        seed: u64,
        factor_resolvable: f64,
        factor_unresolvable: f64,
    ) -> PyResult<Reflexion> {
        let config = reconstruction_config(
            max_layers,
            restarts,
            seed,
            factor_resolvable,
            factor_unresolvable,
        );
        let r = core::reconstruct(&model.inner, &config).map_err(err)?;
        Ok(Reflexion {
            violations: r.violation_count(),
            quality: r.quality.value,
            violating_edges: violating_edges(&r.report),
            architecture: Architecture {
                inner: r.architecture,
            },
        })
    }

    /// Violation listing of `model` against a given architecture, as text.
    #[pyfunction]
    fn check(model: &CodeModel, architecture: &Architecture) -> PyResult<String> {
        let graph = unit_dependency_graph(&model.inner);
        let (report, _) =
            check_conformance(&model.inner, &graph, &architecture.inner).map_err(err)?;
        let fitness = ReconstructionConfig {
            max_layers: architecture.inner.layer_count().max(3),
            ..ReconstructionConfig::default()
        }
        .fitness();
        Ok(violations_text(&report, &fitness))
    }

    /// Transforms `model` toward a fixed architecture.
    #[pyfunction]
    #[pyo3(signature = (model, architecture, max_generations = 100, max_candidates = 10_000))]
    fn migrate(
        model: &CodeModel,
        architecture: &Architecture,
        max_generations: usize,
        max_candidates: usize,
    ) -> PyResult<Migration> {
        let config = MigrationConfig {
            max_generations,
            max_candidates,
            ..MigrationConfig::default()
        };
        let out = core::migrate(&model.inner, &architecture.inner, &config).map_err(err)?;
        Ok(Migration {
            violation_sequence: out.log.violation_sequence(),
            transformations: out
                .log
                .generations
                .iter()
                .filter_map(|g| g.transformation.as_ref().map(ToString::to_string))
                .collect(),
            ledger_checks: out.ledger.checks(),
            table: out.log.to_table(),
            model: CodeModel { inner: out.model },
        })
    }

    /// The reference MVC system and its intended architecture.
    #[pyfunction]
    #[pyo3(signature = (units_per_role = 5))]
    fn mvc_fixture(units_per_role: usize) -> PyResult<(CodeModel, Architecture)> {
        if units_per_role == 0 {
            return Err(err("units_per_role must be at least 1"));
        }
        let (m, a) = lab::build_mvc_fixture(&FixtureSpec {
            units_per_role,
            ..FixtureSpec::default()
        });
        Ok((CodeModel { inner: m }, Architecture { inner: a }))
    }

    /// Adds `count` upward dependencies to a fixture model.
    #[pyfunction]
    #[pyo3(signature = (model, count, seed = 0))]
    fn inject_violations(model: &CodeModel, count: usize, seed: u64) -> PyResult<CodeModel> {
        let (m, _) =
            lab::inject_violations(&model.inner, &InjectionPlan { count, seed }).map_err(err)?;
        Ok(CodeModel { inner: m })
    }

    /// Best architecture by exhaustive enumeration (small models only).
    #[pyfunction]
    #[pyo3(signature = (model, max_layers = 3))]
    fn exhaustive_oracle(model: &CodeModel, max_layers: usize) -> PyResult<(Architecture, f64)> {
        let config = ReconstructionConfig {
            max_layers,
            ..ReconstructionConfig::default()
        };
        let (a, q) = lab::exhaustive_oracle(&model.inner, &config).map_err(err)?;
        Ok((Architecture { inner: a }, q.value))
    }

    /// `(injected, layers, misplaced_units, violations, quality)`
    type ExperimentRow = (usize, usize, usize, usize, f64);

    #[pyfunction]
    #[pyo3(signature = (seed = 0))]
    fn reconstruction_experiment(seed: u64) -> PyResult<Vec<ExperimentRow>> {
        let table =
            lab::reconstruction_experiment(seed, &ReconstructionConfig::default()).map_err(err)?;
        Ok(table
            .rows
            .iter()
            .map(|r| {
                (
                    r.injected,
                    r.layers,
                    r.misplaced_units,
                    r.violations,
                    r.quality,
                )
            })
            .collect())
    }

    /// Violation count per generation of the refactoring experiment.
    #[pyfunction]
    #[pyo3(signature = (seed = 0))]
    fn refactoring_experiment(seed: u64) -> PyResult<Vec<usize>> {
        let run = lab::refactoring_experiment(
            seed,
            &ReconstructionConfig::default(),
            &MigrationConfig::default(),
        )
        .map_err(err)?;
        Ok(run.log().violation_sequence())
    }

    #[pyfunction]
    fn spearman(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        if x.len() != y.len() {
            return Err(err("series must have equal length"));
        }
        Ok(lab::spearman(&x, &y))
    }
}
