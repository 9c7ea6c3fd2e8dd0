use pinching_csi::harness::{sweep_power, sweep_subarray, ExperimentConfig, Method};

fn small(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        trials: 4,
        seed,
        pilot_power_dbm: vec![20.0, 40.0],
        methods: vec![Method::Ls, Method::Coarse, Method::Refined],
        ..ExperimentConfig::default()
    };
    cfg.subarray_sweep.splits = vec![(20, 40), (30, 30)];
    cfg
}

fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f)
}

#[test]
fn power_sweep_is_byte_identical_across_thread_counts() {
    let cfg = small(3);
    let one = with_threads(1, || sweep_power(&cfg).unwrap().to_csv());
    let three = with_threads(3, || sweep_power(&cfg).unwrap().to_csv());
    assert_eq!(one, three);
    assert_eq!(one, sweep_power(&cfg).unwrap().to_csv());
}

#[test]
fn subarray_sweep_is_byte_identical_across_thread_counts() {
    let cfg = small(3);
    let one = with_threads(1, || sweep_subarray(&cfg).unwrap().to_csv());
    let two = with_threads(2, || sweep_subarray(&cfg).unwrap().to_csv());
    assert_eq!(one, two);
}

#[test]
fn seed_changes_the_draws() {
    let a = sweep_power(&small(3)).unwrap();
    let b = sweep_power(&small(4)).unwrap();
    assert_ne!(a.rows[0].mean_nmse, b.rows[0].mean_nmse);
}

#[test]
fn csv_numbers_carry_ten_significant_digits() {
    let csv = sweep_power(&small(3)).unwrap().to_csv();
    for line in csv.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 6);
        for f in &fields[2..4] {
            let mantissa = f.split('e').next().unwrap().replace(['-', '.'], "");
            assert!(mantissa.len() >= 10, "{f}");
            f.parse::<f64>().unwrap();
        }
    }
}
