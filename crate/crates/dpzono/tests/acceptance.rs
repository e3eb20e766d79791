//! Acceptance suite: every release criterion, one test each, with a
//! printed pass/fail line. Run with `cargo test --test acceptance`
//! (add `-- --nocapture` to see the lines for passing criteria).

use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, RowDVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use dpzono::estimator::{correct, correct_dp, noise_norms, optimal_weights, PlantModel, WeightMatrix};
use dpzono::noise::{
    delta_shift, laplace_delta, laplace_range, optimize_distribution, NoiseGrid,
    OptimizerConfig, TruncatedNoiseDistribution,
};
use dpzono::sim::{monte_carlo, optimize_cell, NoiseSource, SimConfig};
use dpzono::zonotope::Zonotope;

fn report(criterion: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion} [{verdict}] {name}: {detail}");
    assert!(pass, "criterion {criterion} ({name}) failed: {detail}");
}

#[test]
fn criterion_1_reference_cells_within_band() {
    let dir = tempfile::tempdir().unwrap();
    let mut detail = String::new();
    let mut pass = true;

    for (epsilon, bound, extra) in [(0.3, 2.0 * 0.0244, Some(1.0 / 14.0)), (0.7, 2.0 * 0.0038, None)]
    {
        let started = Instant::now();
        let out = Command::new(env!("CARGO_BIN_EXE_dpzono"))
            .current_dir(dir.path())
            .args([
                "noise-optimize",
                "--epsilon",
                &epsilon.to_string(),
                "--range",
                "7",
                "--bins",
                "7",
                "--sensitivity",
                "1",
                "--gamma",
                "1",
                "--seed",
                "42",
                "--out",
                &format!("noise_{epsilon}.json"),
            ])
            .output()
            .expect("binary runs");
        let elapsed = started.elapsed();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let line: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let delta = line["delta"].as_f64().unwrap();

        pass &= delta <= bound && elapsed.as_secs() <= 60;
        if let Some(uniform) = extra {
            pass &= delta <= uniform;
        }
        detail.push_str(&format!(
            "eps={epsilon}: delta={delta:.6} (bound {bound:.6}) in {elapsed:.2?}; "
        ));
    }
    report(1, "reference cells within the published band", pass, &detail);
}

#[test]
fn criterion_2_sweep_deltas_are_monotone() {
    let started = Instant::now();
    let epsilons = [0.1, 0.3, 0.5, 0.7];
    let ds = [3.0, 5.0, 7.0, 9.0, 11.0, 13.0, 15.0];
    let mut deltas = vec![vec![0.0; ds.len()]; epsilons.len()];
    for (ei, &epsilon) in epsilons.iter().enumerate() {
        for (di, &d) in ds.iter().enumerate() {
            let cell_index = (ei * ds.len() + di) as u64;
            let (dist, _) = optimize_cell(epsilon, d, 1.0, 5000, 0, cell_index).unwrap();
            deltas[ei][di] = dist.delta();
        }
    }
    let elapsed = started.elapsed();

    let mut pass = elapsed.as_secs() <= 30 * 60;
    let mut worst = String::new();
    for (ei, row) in deltas.iter().enumerate() {
        for di in 0..row.len() - 1 {
            if row[di + 1] > row[di] {
                pass = false;
                worst = format!(
                    "row eps={} rises at d={}: {} -> {}",
                    epsilons[ei],
                    ds[di + 1],
                    row[di],
                    row[di + 1]
                );
            }
        }
    }
    for di in 0..ds.len() {
        for ei in 0..epsilons.len() - 1 {
            if deltas[ei + 1][di] > deltas[ei][di] {
                pass = false;
                worst = format!(
                    "column d={} rises at eps={}: {} -> {}",
                    ds[di],
                    epsilons[ei + 1],
                    deltas[ei][di],
                    deltas[ei + 1][di]
                );
            }
        }
    }
    report(
        2,
        "sweep deltas non-increasing in d and epsilon",
        pass,
        &format!("4x7 grid optimized in {elapsed:.2?}; {worst}"),
    );
}

#[test]
fn criterion_3_laplace_closed_form_and_inversion() {
    let a = laplace_range(0.3, 0.0244, 1.0).unwrap();
    let mut pass = (a - 7.0011).abs() <= 1e-3;
    let mut detail = format!("laplace_range(0.3, 0.0244, 1) = {a:.6}; ");

    for (eps, delta, s) in [(0.3, 0.0244, 1.0), (0.1, 0.1502, 1.0), (0.7, 1.39e-5, 2.0)] {
        let range = laplace_range(eps, delta, s).unwrap();
        let back = laplace_delta(range, eps, s).unwrap();
        let relative = (back - delta).abs() / delta;
        pass &= relative <= 1e-12;
        detail.push_str(&format!("roundtrip rel err {relative:.2e}; "));
    }
    report(3, "truncated-Laplace closed form", pass, &detail);
}

#[test]
fn criterion_4_containment_rate_is_exactly_one() {
    let cfg = SimConfig::circular_tracking_default();
    assert_eq!(cfg.runs, 30);
    assert_eq!(cfg.steps, 200);

    let opt = OptimizerConfig::new(0.3, 1.0);
    let (_, dist) = optimize_distribution(&opt, 7.0, 7, 10, 500.0).unwrap();

    let (_, private) = monte_carlo(&cfg, NoiseSource::Optimal(&dist)).unwrap();
    let (_, plain) = monte_carlo(&cfg, NoiseSource::None).unwrap();
    let pass = private.containment_rate == 1.0 && plain.containment_rate == 1.0;
    report(
        4,
        "containment rate 1.0 with and without privacy noise",
        pass,
        &format!(
            "private {} non-private {} over 30 runs x 200 steps",
            private.containment_rate, plain.containment_rate
        ),
    );
}

#[test]
fn criterion_5_error_trend_over_noise_range() {
    let mut cfg = SimConfig::circular_tracking_default();
    cfg.runs = 30;
    let ds = [3.0, 7.0, 11.0, 15.0];
    let mut means = Vec::new();
    let mut standard_errors = Vec::new();
    for (i, &d) in ds.iter().enumerate() {
        let (dist, _) = optimize_cell(0.3, d, 1.0, 5000, 0, i as u64).unwrap();
        let (_, summary) = monte_carlo(&cfg, NoiseSource::Optimal(&dist)).unwrap();
        let run_means = &summary.run_means;
        let m = summary.mean_error;
        let var = run_means.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
            / (run_means.len() - 1) as f64;
        means.push(m);
        standard_errors.push((var / run_means.len() as f64).sqrt());
    }

    let mut pass = true;
    let mut detail = format!("means {means:?}; ");
    for i in 0..means.len() - 1 {
        if means[i + 1] < means[i] {
            let pooled = (standard_errors[i].powi(2) + standard_errors[i + 1].powi(2)).sqrt();
            let inversion = means[i] - means[i + 1];
            detail.push_str(&format!(
                "inversion {:.4} at d={} (pooled SE {:.4}); ",
                inversion,
                ds[i + 1],
                pooled
            ));
            pass &= inversion <= pooled;
        }
    }
    report(5, "mean error non-decreasing in noise range", pass, &detail);
}

fn random_instance(rng: &mut ChaCha12Rng) -> (PlantModel, Zonotope, Vec<f64>) {
    let n = 2;
    let m = rng.random_range(1..=3usize);
    let gens = DMatrix::from_fn(n, rng.random_range(1..=4usize), |_, _| {
        rng.random_range(-1.0..=1.0)
    });
    let zhat = Zonotope::new(
        DVector::from_fn(n, |_, _| rng.random_range(-5.0..=5.0)),
        gens,
    )
    .unwrap();
    let model = PlantModel {
        transition: DMatrix::identity(n, n),
        measurement_rows: (0..m)
            .map(|_| RowDVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0)))
            .collect(),
        process_noise: Zonotope::point(DVector::zeros(n)).unwrap(),
        measurement_noise: (0..m)
            .map(|_| {
                Zonotope::new(
                    DVector::zeros(1),
                    DMatrix::from_row_slice(1, 1, &[rng.random_range(0.01..0.5)]),
                )
                .unwrap()
            })
            .collect(),
        initial_set: Zonotope::point(DVector::zeros(n)).unwrap(),
    };
    let y: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..=3.0)).collect();
    (model, zhat, y)
}

#[test]
fn criterion_6_zero_range_privacy_correction_is_bit_exact() {
    let mut rng = ChaCha12Rng::seed_from_u64(606);
    let zp = Zonotope::new(DVector::zeros(1), DMatrix::from_row_slice(1, 1, &[0.0])).unwrap();
    let mut pass = true;
    for _ in 0..1000 {
        let (model, zhat, y) = random_instance(&mut rng);
        let norms = noise_norms(&model, Some(&zp));
        let weights = optimal_weights(zhat.generators(), &model.measurement_rows, &norms).unwrap();
        let plain = correct(&zhat, &y, &model, &weights).unwrap();
        let private = correct_dp(&zhat, &y, &model, &zp, &weights).unwrap();
        pass &= plain.center() == private.center() && plain.generators() == private.generators();
    }
    report(
        6,
        "zero-range private correction reproduces the plain one bit-exactly",
        pass,
        "1000 random instances",
    );
}

#[test]
fn criterion_7_delta_is_the_exact_subset_supremum() {
    let mut rng = ChaCha12Rng::seed_from_u64(707);
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=7u32);
        let grid = NoiseGrid::new(n as f64, n).unwrap();
        let mut half: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        half.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let total: f64 = 2.0 * half.iter().sum::<f64>();
        let mut mass: Vec<f64> = half.iter().map(|p| p / total).collect();
        let mirrored: Vec<f64> = mass.iter().rev().cloned().collect();
        mass.extend(mirrored);
        let dist = TruncatedNoiseDistribution::new(grid, mass).unwrap();

        let epsilon: f64 = rng.random_range(0.0..1.0);
        let shift = rng.random_range(0..=n as usize);

        // exhaustive supremum over all 2^(2N) bin subsets
        let bins = dist.mass().len();
        let factor = epsilon.exp();
        let mut brute = 0.0f64;
        for subset in 0u32..(1 << bins) {
            let mut value = 0.0;
            for l in 0..bins {
                if subset >> l & 1 == 1 {
                    let q = if l + shift < bins {
                        dist.mass()[l + shift]
                    } else {
                        0.0
                    };
                    value += dist.mass()[l] - factor * q;
                }
            }
            brute = brute.max(value);
        }
        let fast = delta_shift(dist.mass(), epsilon, shift as i64);
        worst = worst.max((fast - brute).abs());
        pass &= (fast - brute).abs() <= 1e-12;
    }
    report(
        7,
        "delta equals the exhaustive subset supremum",
        pass,
        &format!("100 random distributions, worst gap {worst:.2e}"),
    );
}

#[test]
fn criterion_8_weights_are_unbeatable_and_stationary() {
    let mut rng = ChaCha12Rng::seed_from_u64(808);
    let mut pass = true;
    let mut worst_derivative: f64 = 0.0;

    let gbar_sq = |zhat: &Zonotope, model: &PlantModel, w: &WeightMatrix| -> f64 {
        let out = correct(zhat, &vec![0.0; model.sensor_count()], model, w).unwrap();
        out.generators().iter().map(|g| g * g).sum::<f64>()
    };

    for _ in 0..100 {
        let (model, zhat, _) = random_instance(&mut rng);
        let norms = noise_norms(&model, None);
        let w = optimal_weights(zhat.generators(), &model.measurement_rows, &norms).unwrap();
        let base = gbar_sq(&zhat, &model, &w).sqrt();

        for _ in 0..1000 {
            let delta = DMatrix::from_fn(2, model.sensor_count(), |_, _| {
                rng.random_range(-1.0..=1.0)
            });
            let scale = 1e-3 / delta.iter().map(|v| v * v).sum::<f64>().sqrt();
            let perturbed =
                WeightMatrix::new(w.as_matrix() + delta * scale).unwrap();
            pass &= gbar_sq(&zhat, &model, &perturbed).sqrt() >= base - 1e-12;
        }

        for _ in 0..20 {
            let dir = {
                let raw = DMatrix::from_fn(2, model.sensor_count(), |_, _| {
                    rng.random_range(-1.0..=1.0)
                });
                let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
                raw / norm
            };
            let h = 1e-6;
            let up = gbar_sq(&zhat, &model, &WeightMatrix::new(w.as_matrix() + &dir * h).unwrap());
            let down =
                gbar_sq(&zhat, &model, &WeightMatrix::new(w.as_matrix() - &dir * h).unwrap());
            let derivative = ((up - down) / (2.0 * h)).abs();
            worst_derivative = worst_derivative.max(derivative);
            pass &= derivative <= 1e-6;
        }
    }
    report(
        8,
        "fusion weights survive perturbation and have vanishing gradient",
        pass,
        &format!("worst |directional derivative| {worst_derivative:.2e}"),
    );
}

#[test]
fn criterion_9_simulate_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_dpzono"))
        .current_dir(dir.path())
        .args([
            "noise-optimize",
            "--epsilon",
            "0.3",
            "--range",
            "7",
            "--bins",
            "7",
            "--sensitivity",
            "1",
            "--epochs",
            "600",
            "--out",
            "noise.json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());

    for name in ["a.csv", "b.csv"] {
        let out = Command::new(env!("CARGO_BIN_EXE_dpzono"))
            .current_dir(dir.path())
            .args([
                "simulate",
                "--noise",
                "noise.json",
                "--out",
                name,
                "--summary",
                &format!("{name}.json"),
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    let pass = a == b;
    report(
        9,
        "repeated simulate runs are byte-identical",
        pass,
        &format!("{} bytes compared", a.len()),
    );
}
