use std::path::PathBuf;

use pa_core::format::{read_automaton, write_automaton};
use pa_core::{fixtures, r, Error, ProbAutomaton};

fn read(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    std::fs::read_to_string(p).unwrap()
}

fn same(file: &str, pa: ProbAutomaton) {
    let loaded = read_automaton(&read(file)).unwrap();
    assert_eq!(write_automaton(&loaded), write_automaton(&pa), "{file} drifted from the built-in fixture");
    assert!(loaded.validate().is_empty());
}

#[test]
fn shipped_files_match_builtins() {
    let eps = r!(1, 4);
    same("fig1.json", fixtures::fig1());
    same("prio_not_post.json", fixtures::prio_not_post());
    same("fig3_left.json", fixtures::fig3_left(&eps));
    same("fig3_right.json", fixtures::fig3_right(&eps));
}

#[test]
fn bad_file_breaks_the_mass_bound() {
    let pa = read_automaton(&read("bad.json")).unwrap();
    match pa.ensure_valid() {
        Err(Error::InvalidModel(v)) => assert!(v[0].to_string().contains("9/8")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn composition_fixtures_load() {
    for f in ["sender.json", "receiver.json", "coin.json"] {
        let pa = read_automaton(&read(f)).unwrap();
        assert!(pa.validate().is_empty() && pa.initial().is_some(), "{f}");
    }
    let spec: pa_core::algebra::ChoiceSpec = serde_json::from_str(&read("choice.json")).unwrap();
    assert_eq!(spec.branches.len(), 2);
}
