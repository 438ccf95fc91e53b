//! Replays the checked-in fuzz corpus through the same entry points the fuzz
//! targets exercise, so corpus regressions surface in ordinary test runs
//! without a fuzzing toolchain.

use std::fs;
use std::path::PathBuf;

use mobius_sense::plot::{read_plot_data, render_svg, XAxis};
use mobius_sense::{HomMatrixPolynomial, Mobius2x2};

fn corpus(dir: &str) -> Vec<Vec<u8>> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(dir);
    let mut out = Vec::new();
    for entry in fs::read_dir(&root).unwrap_or_else(|e| panic!("corpus {dir} missing: {e}")) {
        out.push(fs::read(entry.unwrap().path()).unwrap());
    }
    assert!(!out.is_empty(), "corpus {dir} is empty");
    out
}

#[test]
fn poly_json_corpus_replays() {
    for data in corpus("poly_json") {
        let Ok(text) = std::str::from_utf8(&data) else {
            continue;
        };
        if let Ok(p) = HomMatrixPolynomial::from_json_str(text) {
            let round = HomMatrixPolynomial::from_json_str(&p.to_json_string()).unwrap();
            assert_eq!(p, round);
        }
    }
}

#[test]
fn mobius_spec_corpus_replays() {
    for data in corpus("mobius_spec") {
        let Ok(text) = std::str::from_utf8(&data) else {
            continue;
        };
        if let Ok(m) = Mobius2x2::from_spec(text) {
            assert!(m.det().norm() > 0.0);
            let round = Mobius2x2::from_spec(&m.to_json_string()).unwrap();
            assert_eq!(m.entries(), round.entries());
        }
    }
}

#[test]
fn plot_csv_corpus_replays() {
    for data in corpus("plot_csv") {
        for x in [XAxis::Degree, XAxis::Rho, XAxis::CondInfA] {
            for bounds in [false, true] {
                if let Ok(plot) = read_plot_data(data.as_slice(), x, bounds) {
                    let _ = render_svg(&plot);
                }
            }
        }
    }
}
