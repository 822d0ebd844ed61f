use discsde::analysis::least_squares_slope;
use discsde::harness::{raw_errors, run_convergence, write_convergence, ExperimentConfig};
use discsde::SchemeKind;

fn config(model: &str) -> ExperimentConfig {
    ExperimentConfig {
        model: model.into(),
        schemes: vec![SchemeKind::EulerMaruyama, SchemeKind::Transformed],
        n_paths: 96,
        k_min: 1,
        k_max: 5,
        seed: 21,
        dump_paths: true,
        ..ExperimentConfig::default()
    }
}

fn read_csv(path: &std::path::Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn errors_can_be_recomputed_from_dumped_states() {
    let cfg = config("circle");
    let reports = run_convergence(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_convergence(dir.path(), &reports, true).unwrap();
    let summary = read_csv(&dir.path().join("convergence.csv"));

    for r in &reports {
        let dump = read_csv(&dir.path().join(format!("terminal_circle_{}.csv", r.scheme.tag())));
        let levels = r.terminal_levels.len();
        let mut terminal = vec![vec![Vec::new(); levels]; cfg.n_paths];
        for row in dump {
            let path: usize = row[0].parse().unwrap();
            let k: u32 = row[1].parse().unwrap();
            let slot = r.terminal_levels.iter().position(|l| *l == k).unwrap();
            terminal[path][slot] = row[2..].iter().map(|v| v.parse::<f64>().unwrap()).collect();
        }
        let raw = raw_errors(&terminal);
        let normalizer = 0.5 / raw[0];
        let rows: Vec<&Vec<String>> = summary.iter().filter(|row| row[1] == r.scheme.tag()).collect();
        assert_eq!(rows.len(), raw.len());
        for (row, e) in rows.iter().zip(&raw) {
            assert_eq!(row[6].parse::<f64>().unwrap(), *e);
            assert_eq!(row[7].parse::<f64>().unwrap(), normalizer * e);
        }

        // closed-form least squares on the emitted pairs
        let xs: Vec<f64> = rows.iter().map(|row| row[5].parse().unwrap()).collect();
        let ys: Vec<f64> = rows.iter().map(|row| row[8].parse().unwrap()).collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let emitted: f64 = rows[0][10].parse().unwrap();
        assert!((emitted - sxy / sxx).abs() < 1e-12);
        assert!((least_squares_slope(&xs, &ys).unwrap() - emitted).abs() < 1e-12);
    }
}

#[test]
fn csv_output_is_independent_of_thread_count() {
    let bytes = |threads| {
        let cfg = ExperimentConfig { threads, dump_paths: false, ..config("step") };
        let dir = tempfile::tempdir().unwrap();
        write_convergence(dir.path(), &run_convergence(&cfg).unwrap(), false).unwrap();
        std::fs::read(dir.path().join("convergence.csv")).unwrap()
    };
    let one = bytes(1);
    assert_eq!(one, bytes(3));
    assert_eq!(one, bytes(0));
}

#[test]
fn deterministic_ode_converges_at_order_one() {
    let cfg =
        ExperimentConfig { n_paths: 4, k_max: 8, schemes: vec![SchemeKind::EulerMaruyama], ..config("linear-ode") };
    let slope = run_convergence(&cfg).unwrap()[0].slope.unwrap();
    assert!((slope - 1.0).abs() <= 0.05, "slope {slope}");
}
