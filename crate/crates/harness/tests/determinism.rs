use std::fs;

use plasmosense_harness::{emit_csv, emit_samples, run_angle_scan, run_concentration_scan, RunReport, ScenarioConfig};
use proptest::prelude::*;
use tempfile::tempdir;

fn small(seed: u64) -> ScenarioConfig {
    let mut c = ScenarioConfig::paper_default(1.5106);
    c.seed = seed;
    c.trials = 3000;
    c.repetitions = 64;
    c.angle_steps = 5;
    c.concentrations = vec![0.0, 1.0, 2.0];
    c
}

fn body(report: &RunReport) -> (Vec<u8>, Vec<u8>) {
    let dir = tempdir().unwrap();
    let table = dir.path().join("t.csv");
    let samples = dir.path().join("s.csv");
    emit_csv(report, &table).unwrap();
    emit_samples(report, &samples).unwrap();
    (fs::read(table).unwrap(), fs::read(samples).unwrap())
}

fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn angle_scan_bytes_independent_of_threads(seed in any::<u64>()) {
        let config = small(seed);
        let one = with_threads(1, || body(&run_angle_scan(&config).unwrap()));
        let many = with_threads(4, || body(&run_angle_scan(&config).unwrap()));
        prop_assert_eq!(one, many);
    }

    #[test]
    fn concentration_scan_bytes_independent_of_threads(seed in any::<u64>()) {
        let config = small(seed);
        let one = with_threads(1, || body(&run_concentration_scan(&config).unwrap()));
        let many = with_threads(3, || body(&run_concentration_scan(&config).unwrap()));
        prop_assert_eq!(one, many);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let config = small(17);
    assert_eq!(body(&run_angle_scan(&config).unwrap()), body(&run_angle_scan(&config).unwrap()));
    assert_ne!(
        body(&run_angle_scan(&config).unwrap()).0,
        body(&run_angle_scan(&small(18)).unwrap()).0
    );
}
