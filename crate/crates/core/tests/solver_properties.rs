mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use tlgc::baseline_sc::{fit_sc, sc_objective, SCConfig};
use tlgc::dispersion::{self, DispersionSet};
use tlgc::tl_solver::{self, SolverConfig, SolverState};
use tlgc::LabeledDataset;

use common::*;

fn problem(seed: u64) -> LabeledDataset {
    random_small_problem(&mut rng(seed), 10, 30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn s_inverse_is_symmetric_inverse_square_root(seed in any::<u64>(), n in 1usize..8) {
        let mut r = rng(seed);
        // D ≥ n with a well-spread v keeps A = Xᵀ Diag(v)² X well-conditioned
        let x = gaussian_matrix(&mut r, n + 4, n);
        let v = DVector::from_fn(n + 4, |i, _| 0.5 + (i % 3) as f64 * 0.25);
        let v = &v / v.norm();
        let s = tl_solver::s_inverse(&x, &v, 1e-10);
        prop_assert!((&s.matrix - s.matrix.transpose()).abs().max() <= 1e-8);
        let xv = DMatrix::from_fn(n + 4, n, |a, b| v[a] * x[(a, b)]);
        let a = xv.transpose() * xv;
        let prod = &s.matrix * &s.matrix * a;
        prop_assert!((prod - DMatrix::<f64>::identity(n, n)).abs().max() <= 1e-6);
    }

    #[test]
    fn emitted_directions_are_orthonormal(seed in any::<u64>()) {
        let ds = problem(seed);
        let d = ds.dim().min(5);
        let p = tl_solver::fit(&ds, &SolverConfig { target_dim: d, seed, ..SolverConfig::default() }).unwrap();
        for i in 0..d {
            let ci = p.matrix.column(i);
            prop_assert!((ci.norm() - 1.0).abs() <= 1e-10);
            for j in 0..i {
                prop_assert!(ci.dot(&p.matrix.column(j)).abs() <= 1e-6);
            }
        }
        for rec in &p.records {
            for v in &rec.iterates {
                prop_assert!((v.norm() - 1.0).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn sign_flip_of_start_flips_the_path(seed in any::<u64>()) {
        let ds = problem(seed);
        let disp = dispersion::build_dispersions(&ds).unwrap();
        let cfg = SolverConfig::default();
        let v0 = unit_vector(&mut rng(seed ^ 1), ds.dim());
        let (a, _) = tl_solver::solve_direction(ds.x(), &disp, &cfg, &v0).unwrap();
        let (b, _) = tl_solver::solve_direction(ds.x(), &disp, &cfg, &(-&v0)).unwrap();
        prop_assert!((&a + &b).abs().max() <= 1e-9, "{a} vs {b}");
    }

    #[test]
    fn converged_directions_are_fixed_points(seed in any::<u64>()) {
        let ds = problem(seed);
        let disp = dispersion::build_dispersions(&ds).unwrap();
        let cfg = SolverConfig::default();
        let v0 = unit_vector(&mut rng(seed ^ 2), ds.dim());
        let (v, rec) = tl_solver::solve_direction(ds.x(), &disp, &cfg, &v0).unwrap();
        if rec.converged {
            // S⁻¹ stays the one computed at v0
            let mut state = SolverState::new(ds.x(), &disp, v0.clone(), &cfg);
            state.v = v.clone();
            state.objective = state.surrogate(&disp, &v, cfg.delta);
            let next = tl_solver::ascent_step(&state, &disp, &cfg).unwrap();
            prop_assert!((next - v).norm() <= cfg.tol);
        }
    }

    #[test]
    fn deflated_data_loses_the_direction(seed in any::<u64>()) {
        let ds = problem(seed);
        let v = unit_vector(&mut rng(seed ^ 3), ds.dim());
        let x = dispersion::deflate_samples(ds.x(), &v).unwrap();
        prop_assert!((v.transpose() * x).abs().max() <= 1e-12);
    }

    #[test]
    fn sc_ratio_is_in_unit_interval_and_mixing_invariant(seed in any::<u64>()) {
        let ds = problem(seed);
        let d = ds.dim().min(3);
        let p = fit_sc(&ds, &SCConfig { target_dim: d, pca_rank: None }).unwrap();
        let scatter = dispersion::build_scatter(&ds).unwrap();
        let r1 = sc_objective(&p.matrix, &scatter).unwrap();
        prop_assert!(r1 > 0.0 && r1 <= 1.0 + 1e-12);
        let q = gaussian_matrix(&mut rng(seed), d, d).qr().q();
        let r2 = sc_objective(&(&p.matrix * q), &scatter).unwrap();
        prop_assert!((r1 - r2).abs() <= 1e-10);
    }
}

#[test]
fn same_seed_same_bits() {
    let ds = problem(11);
    let cfg = SolverConfig { target_dim: 3, seed: 5, ..SolverConfig::default() };
    let a = tl_solver::fit(&ds, &cfg).unwrap();
    let b = tl_solver::fit(&ds, &cfg).unwrap();
    assert_eq!(a.matrix, b.matrix);
}

#[test]
fn axis_separated_classes_pick_the_axis() {
    // classes at x₁ = ±3, spread only along x₂
    let mut r = rng(9);
    let n = 12;
    let mut x = DMatrix::zeros(2, 2 * n);
    let mut labels = Vec::new();
    for i in 0..2 * n {
        let c = i / n;
        x[(0, i)] = if c == 0 { -3.0 } else { 3.0 } + 0.1 * gaussian_matrix(&mut r, 1, 1)[0];
        x[(1, i)] = gaussian_matrix(&mut r, 1, 1)[0];
        labels.push(c + 1);
    }
    let ds = LabeledDataset::new(x, labels, 2).unwrap();
    for seed in 0..5 {
        let p = tl_solver::fit(&ds, &SolverConfig { seed, ..SolverConfig::default() }).unwrap();
        assert!(p.matrix[(0, 0)].abs() >= 0.99, "seed {seed}: {}", p.matrix);
    }
}

#[test]
fn zero_within_columns_and_no_penalty_give_the_sign_sum() {
    let ds = LabeledDataset::new(
        DMatrix::from_row_slice(2, 4, &[0.0, 0.0, 3.0, 3.0, 1.0, 1.0, 2.0, 2.0]),
        vec![1, 1, 2, 2],
        2,
    )
    .unwrap();
    let disp: DispersionSet = dispersion::build_dispersions(&ds).unwrap();
    assert!(disp.within.iter().all(|&e| e == 0.0));
    let cfg = SolverConfig { delta: 0.0, ..SolverConfig::default() };
    let v = DVector::from_vec(vec![0.6, 0.8]);
    let state = SolverState::new(ds.x(), &disp, v.clone(), &cfg);
    let u = tl_solver::update_v(&state, &disp, ds.x(), &cfg).unwrap();
    let (q, _) = tl_solver::sign_vectors(&v, &disp);
    let n: DVector<f64> = disp.between.column_iter().zip(q.iter()).map(|(c, s)| c * *s).sum();
    assert!((u - &n / n.norm()).abs().max() < 1e-12);
}

#[test]
fn sc_leading_direction_maximizes_the_trace_difference_on_a_grid() {
    let mut r = rng(77);
    for _ in 0..10 {
        let ds = random_problem(&mut r, 2, &[6, 9], 2.0);
        let scatter = dispersion::build_scatter(&ds).unwrap();
        let p = fit_sc(&ds, &SCConfig::default()).unwrap();
        let diff = &scatter.between - &scatter.within;
        let value = |v: &DVector<f64>| v.dot(&(&diff * v));
        let best = (0..3600)
            .map(|k| {
                let t = k as f64 * std::f64::consts::PI / 1800.0;
                DVector::from_vec(vec![t.cos(), t.sin()])
            })
            .max_by(|a, b| value(a).total_cmp(&value(b)))
            .unwrap();
        let v = p.matrix.column(0).into_owned();
        assert!(line_angle_deg(&v, &best) <= 0.1);
    }
}

#[test]
fn sc_axis_example_matches_the_ratio_grid_oracle() {
    let ds = LabeledDataset::new(
        DMatrix::from_row_slice(2, 4, &[0.0, 0.0, 5.0, 5.0, 0.0, 1.0, 0.0, 1.0]),
        vec![1, 1, 2, 2],
        2,
    )
    .unwrap();
    let scatter = dispersion::build_scatter(&ds).unwrap();
    let ratio = |v: &DVector<f64>| {
        sc_objective(&DMatrix::from_column_slice(2, 1, v.as_slice()), &scatter).unwrap()
    };
    let best = (0..3600)
        .map(|k| {
            let t = k as f64 * std::f64::consts::PI / 1800.0;
            DVector::from_vec(vec![t.cos(), t.sin()])
        })
        .max_by(|a, b| ratio(a).total_cmp(&ratio(b)))
        .unwrap();
    let v = fit_sc(&ds, &SCConfig::default()).unwrap().matrix.column(0).into_owned();
    assert!(line_angle_deg(&v, &best) <= 1e-6);
    assert!((v[0].abs() - 1.0).abs() <= 1e-6);
}

#[test]
fn sc_directions_ignore_sample_scale() {
    let ds = problem(4);
    let scaled = ds.with_x(ds.x() * 7.5).unwrap();
    let cfg = SCConfig { target_dim: 2, pca_rank: None };
    let a = fit_sc(&ds, &cfg).unwrap();
    let b = fit_sc(&scaled, &cfg).unwrap();
    for j in 0..2 {
        let (ca, cb) = (a.matrix.column(j), b.matrix.column(j));
        assert!((ca - cb).abs().max().min((ca + cb).abs().max()) <= 1e-6);
    }
}
