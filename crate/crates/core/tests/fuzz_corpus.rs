//! Replays the checked-in fuzz seed corpus through the same checks the fuzz
//! targets make.

use std::fs;
use std::path::PathBuf;

use qdiscord::{DensityOperator, Expression, KrausInstrument, MeasurementFamily};

fn corpus(name: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(name);
    let mut files: Vec<_> =
        fs::read_dir(&dir).unwrap_or_else(|e| panic!("{}: {e}", dir.display())).map(|e| e.unwrap().path()).collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect()
}

#[test]
fn state_seeds() {
    let mut accepted = Vec::new();
    for (name, text) in corpus("state_json") {
        if let Ok(rho) = DensityOperator::from_json_str(&text) {
            let again = DensityOperator::from_json_str(&rho.to_json_string()).unwrap();
            assert_eq!(again.layout(), rho.layout());
            accepted.push(name);
        }
    }
    assert_eq!(accepted, ["isotropic_qutrits.json", "pure.json", "werner.json"]);
}

#[test]
fn instrument_seeds() {
    let mut accepted = Vec::new();
    for (name, text) in corpus("instrument_json") {
        if let Ok(inst) = KrausInstrument::from_json_str(&text) {
            let again = KrausInstrument::from_json_str(&inst.to_json_string()).unwrap();
            assert_eq!(again.kraus_counts(), inst.kraus_counts());
            accepted.push(name);
        }
    }
    assert_eq!(accepted, ["trine.json", "two_kraus_each.json", "z_basis.json"]);
}

#[test]
fn name_seeds() {
    for (_, text) in corpus("names") {
        if let Ok(f) = text.parse::<MeasurementFamily>() {
            assert_eq!(f.to_string().parse::<MeasurementFamily>().ok(), Some(f));
        }
        if let Ok(e) = text.parse::<Expression>() {
            assert_eq!(e.to_string(), text);
        }
    }
}
