#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use archrefit_core::lab::{build_mvc_fixture, inject_violations, FixtureSpec, InjectionPlan};
use archrefit_core::{reconstruct, ReconstructionConfig};

pub fn archrefit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_archrefit"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Input files under `dir`: the clean fixture, its intended architecture,
/// the fixture with ten injected violations (seed 0) and the architecture
/// reconstructed from it.
pub struct Inputs {
    pub fixture: PathBuf,
    pub intended: PathBuf,
    pub eroded: PathBuf,
    pub eroded_arch: PathBuf,
}

pub fn write_inputs(dir: &Path) -> Inputs {
    let (fixture, intended) = build_mvc_fixture(&FixtureSpec::default());
    let (eroded, _) = inject_violations(&fixture, &InjectionPlan { count: 10, seed: 0 }).unwrap();
    let reflexion = reconstruct(&eroded, &ReconstructionConfig::default()).unwrap();
    let inputs = Inputs {
        fixture: dir.join("fixture.json"),
        intended: dir.join("intended.json"),
        eroded: dir.join("eroded.json"),
        eroded_arch: dir.join("eroded_arch.json"),
    };
    fs::write(&inputs.fixture, fixture.to_json()).unwrap();
    fs::write(&inputs.intended, intended.to_json()).unwrap();
    fs::write(&inputs.eroded, eroded.to_json()).unwrap();
    fs::write(&inputs.eroded_arch, reflexion.architecture.to_json()).unwrap();
    inputs
}

pub fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}
