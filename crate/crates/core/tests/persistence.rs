use std::fs;

use twoscale::io::{read_trajectory, write_trajectory};
use twoscale::linalg::SymMatrix;
use twoscale::time_l1::solve_with_policy;
use twoscale::{preset_b, Datum, Mesh, ProblemSpec, QuadratureConfig, SnapshotPolicy};

#[test]
fn trajectory_round_trips_bit_identically() {
    let q = QuadratureConfig::default();
    let p = preset_b(0.3, 0.6).unwrap();
    let t = solve_with_policy(&p, 12, 6, &q, &SnapshotPolicy::All).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.txt");
    write_trajectory(&t, &path).unwrap();
    let back = read_trajectory(&path).unwrap();
    assert_eq!(back, t);
    let header = fs::read_to_string(&path).unwrap();
    let n: usize = header
        .lines()
        .next()
        .unwrap()
        .split_whitespace()
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(n, t.final_state().coeffs().len() + 1);
}

#[test]
fn zero_trajectory_file_is_all_zeros() {
    let q = QuadratureConfig::default();
    let p = ProblemSpec::new(0.5, 0.5, (0.0, 1.0), 1.0, Datum::zero(), Datum::zero()).unwrap();
    let t = solve_with_policy(&p, 6, 3, &q, &SnapshotPolicy::All).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.txt");
    write_trajectory(&t, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    for line in text.lines().skip(1) {
        for v in line.split_whitespace().skip(1) {
            assert_eq!(v.parse::<f64>().unwrap(), 0.0);
        }
    }
}

#[test]
fn malformed_files_are_reported_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    fs::write(&path, "0 1 4 0.5 0.5 0.25\n0 1 2\n").unwrap();
    let err = read_trajectory(&path).unwrap_err().to_string();
    assert!(err.contains("line 2"), "{err}");
    assert!(read_trajectory(&dir.path().join("missing.txt")).is_err());
}

#[test]
fn matrix_triplets_round_trip() {
    let q = QuadratureConfig::default();
    let s = twoscale::fractional::assemble_fractional(&Mesh::unit(6).unwrap(), 0.4, &q).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.mtx");
    s.write_triplets(&path).unwrap();
    let back = SymMatrix::read_triplets(&path).unwrap();
    assert_eq!(back.to_dense(), s.to_dense());
    assert!(fs::read_to_string(&path)
        .unwrap()
        .starts_with("%%SymMatrix 5\n"));
}
