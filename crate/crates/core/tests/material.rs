use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use phasefield::material::{eig_sym, psi0, split_energy_unchecked, split_parts};
use phasefield::{CrackDensity, Degradation, MaterialModel, Split, SymTensor};

const LAMBDA: f64 = 121.0;
const MU: f64 = 80.0;

fn random_tensor(rng: &mut StdRng, dim: usize, scale: f64) -> SymTensor {
    let n = dim * (dim + 1) / 2;
    let p: Vec<f64> = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
    SymTensor::from_packed(dim, &p)
}

fn model(split: Split) -> MaterialModel {
    MaterialModel::notched_tension(CrackDensity::AT2, split)
}

/// Distance of `eps` from the set where a split is not twice differentiable.
fn kink_distance(split: Split, eps: &SymTensor) -> f64 {
    let tr = eps.trace().abs();
    match split {
        Split::Isotropic | Split::VolDev => f64::INFINITY,
        Split::VolPm => tr,
        Split::Spectral => {
            let e = eig_sym(eps);
            e.values[..eps.dim()].iter().fold(tr, |m, l| m.min(l.abs()))
        }
    }
}

#[test]
fn splitting_identity_sampled() {
    let mut rng = StdRng::seed_from_u64(1);
    for split in Split::ALL {
        for dim in [2, 3] {
            for _ in 0..10_000 {
                let eps = random_tensor(&mut rng, dim, 1.0);
                let (p, m) = split_parts(split, LAMBDA, MU, &eps);
                let full = psi0(LAMBDA, MU, &eps);
                assert!((p + m - full).abs() <= 1e-12 * (1.0 + full.abs()), "{split:?} {dim}");
                let s = split_energy_unchecked(split, LAMBDA, MU, &eps);
                assert_eq!((s.psi_plus, s.psi_minus), (p, m));
                assert!(p >= 0.0 && m >= 0.0);
            }
        }
    }
}

#[test]
fn stress_matches_central_differences() {
    let mut rng = StdRng::seed_from_u64(2);
    for split in Split::ALL {
        let m = model(split);
        let mut checked = 0;
        while checked < 1000 {
            let dim = if checked % 2 == 0 { 2 } else { 3 };
            let eps = random_tensor(&mut rng, dim, 1.0);
            if kink_distance(split, &eps) < 1e-3 {
                continue;
            }
            let d = rng.random_range(0.0..1.0);
            let e = m.psi_eval(&eps, d).unwrap();
            let h = 1e-6 * (1.0 + eps.norm());
            let n = eps.packed().len();
            let mut fd = vec![0.0; n];
            for (k, fk) in fd.iter_mut().enumerate() {
                let mut dp = vec![0.0; n];
                dp[k] = 1.0;
                let dir = SymTensor::from_packed(dim, &dp);
                let vp = m.psi_eval(&(eps + h * dir), d).unwrap().value;
                let vm = m.psi_eval(&(eps - h * dir), d).unwrap().value;
                // Directional derivative along a packed coordinate.
                *fk = (vp - vm) / (2.0 * h);
            }
            let mut err = 0.0f64;
            let mut nrm = 0.0f64;
            for (k, fk) in fd.iter().enumerate() {
                let mut dp = vec![0.0; n];
                dp[k] = 1.0;
                let exact = e.stress.inner(&SymTensor::from_packed(dim, &dp));
                err = err.max((exact - fk).abs());
                nrm = nrm.max(exact.abs());
            }
            assert!(err <= 1e-5 * nrm.max(1.0), "{split:?}: {err} vs {nrm}");
            checked += 1;
        }
    }
}

#[test]
fn hessian_matches_difference_of_stress() {
    let mut rng = StdRng::seed_from_u64(3);
    for split in Split::ALL {
        let m = model(split);
        let mut checked = 0;
        while checked < 1000 {
            let dim = if checked % 2 == 0 { 2 } else { 3 };
            let eps = random_tensor(&mut rng, dim, 1.0);
            if kink_distance(split, &eps) < 1e-3 {
                continue;
            }
            let d = rng.random_range(0.0..1.0);
            let dir = random_tensor(&mut rng, dim, 1.0);
            let h = 1e-7 * (1.0 + eps.norm());
            let sp = m.psi_eval(&(eps + h * dir), d).unwrap().stress;
            let sm = m.psi_eval(&(eps - h * dir), d).unwrap().stress;
            let fd = (1.0 / (2.0 * h)) * (sp - sm);
            let exact = m.psi_eval(&eps, d).unwrap().eps_hessian.apply(&dir);
            let err = (fd - exact).norm();
            assert!(err <= 1e-4 * exact.norm().max(1.0), "{split:?}: {err} / {}", exact.norm());
            checked += 1;
        }
    }
}

#[test]
fn spectral_line_through_compression() {
    let m = model(Split::Spectral);
    for i in 1..10 {
        let t = i as f64 / 10.0;
        let v = m.psi_eval(&SymTensor::diag(&[-1.0, t]), 1.0).unwrap().value;
        let expect = m.k * m.mu * t * t + 0.5 * m.lambda * (t - 1.0).powi(2) + m.mu;
        assert_relative_eq!(v, expect, max_relative = 4.0 * f64::EPSILON);
    }
}

#[test]
fn spectral_line_is_concave_for_negative_lambda() {
    let lambda = -20.0;
    let k = 1e-5;
    let f = |t: f64| {
        let s = split_energy_unchecked(Split::Spectral, lambda, MU, &SymTensor::diag(&[-1.0, t]));
        k * s.psi_plus + s.psi_minus
    };
    for i in 1..9 {
        let t = i as f64 / 10.0;
        let second = f(t + 0.05) - 2.0 * f(t) + f(t - 0.05);
        assert!(second < 0.0, "t = {t}: {second}");
    }
}

#[test]
fn uniform_strong_convexity_sampled() {
    let mut rng = StdRng::seed_from_u64(4);
    for split in Split::ALL {
        let m = model(split);
        let eta = m.convexity_modulus();
        for i in 0..10_000 {
            let dim = 2 + i % 2;
            let a = random_tensor(&mut rng, dim, 1.0);
            let b = random_tensor(&mut rng, dim, 1.0);
            let d = rng.random_range(0.0..=1.0);
            let t: f64 = rng.random_range(0.0..1.0);
            let psi = |e: &SymTensor| m.psi_eval(e, d).unwrap().value;
            let lhs = psi(&(t * a + (1.0 - t) * b));
            let rhs = t * psi(&a) + (1.0 - t) * psi(&b) - 0.5 * eta * t * (1.0 - t) * (a - b).inner(&(a - b));
            assert!(lhs <= rhs + 1e-10 * (1.0 + rhs.abs()), "{split:?}: {lhs} > {rhs}");
            // Coercivity with the same modulus.
            assert!(psi(&a) >= 0.5 * eta * a.inner(&a) * (1.0 - 1e-12));
        }
    }
}

#[test]
fn hessian_eigenvalues_bounded_below() {
    let mut rng = StdRng::seed_from_u64(5);
    for split in Split::ALL {
        let m = model(split);
        let eta = m.convexity_modulus();
        for _ in 0..2000 {
            let eps = random_tensor(&mut rng, 3, 1.0);
            let d = rng.random_range(0.0..=1.0);
            let h = m.psi_eval(&eps, d).unwrap().eps_hessian;
            let mat = nalgebra::SMatrix::<f64, 6, 6>::from_fn(|i, j| h.mandel()[i][j]);
            assert!((mat - mat.transpose()).norm() <= 1e-10 * mat.norm());
            let min = mat.symmetric_eigen().eigenvalues.min();
            assert!(min >= eta * (1.0 - 1e-6), "{split:?}: {min} < {eta}");
        }
    }
}

#[test]
fn stress_is_lipschitz() {
    let mut rng = StdRng::seed_from_u64(6);
    for split in Split::ALL {
        let m = model(split);
        for i in 0..5000 {
            let dim = 2 + i % 2;
            let bound = (1.0 + m.k) * (2.0 * m.mu + dim as f64 * m.lambda);
            let a = random_tensor(&mut rng, dim, 1.0);
            let b = a + random_tensor(&mut rng, dim, 10f64.powi(-(i as i32 % 6)));
            let d = rng.random_range(0.0..=1.0);
            let ds = m.psi_eval(&a, d).unwrap().stress - m.psi_eval(&b, d).unwrap().stress;
            assert!(ds.norm() <= bound * (a - b).norm() * (1.0 + 1e-12));
        }
    }
}

#[test]
fn tensile_part_is_monotone() {
    let mut rng = StdRng::seed_from_u64(7);
    for split in Split::ALL {
        for i in 0..5000 {
            let dim = 2 + i % 2;
            let a = random_tensor(&mut rng, dim, 1.0);
            let b = random_tensor(&mut rng, dim, 1.0);
            let sa = split_energy_unchecked(split, LAMBDA, MU, &a).stress_plus;
            let sb = split_energy_unchecked(split, LAMBDA, MU, &b).stress_plus;
            assert!((sa - sb).inner(&(a - b)) >= -1e-10);
        }
    }
}

#[test]
fn stress_is_continuous_across_kinks() {
    let mut rng = StdRng::seed_from_u64(8);
    let delta = 1e-8;
    for split in [Split::VolPm, Split::Spectral] {
        let m = model(split);
        let lip = (1.0 + m.k) * (2.0 * m.mu + 2.0 * m.lambda);
        for _ in 0..1000 {
            // Cross tr = 0 for VolPM, a zero eigenvalue for the spectral split.
            let x = rng.random_range(-1.0..1.0);
            let base = match split {
                Split::VolPm => SymTensor::from_packed(2, &[x, rng.random_range(-1.0..1.0), -x]),
                _ => SymTensor::diag(&[0.0, x]),
            };
            let dir = SymTensor::diag(&[1.0, 0.0]);
            let d = rng.random_range(0.0..=1.0);
            let sp = m.psi_eval(&(base + delta * dir), d).unwrap().stress;
            let sm = m.psi_eval(&(base - delta * dir), d).unwrap().stress;
            assert!((sp - sm).norm() <= 1e-6 * lip);
        }
    }
}

#[test]
fn eigen_decomposition_matches_nalgebra() {
    let mut rng = StdRng::seed_from_u64(9);
    for _ in 0..1000 {
        let a = random_tensor(&mut rng, 3, 2.0);
        let e = eig_sym(&a);
        let m = nalgebra::Matrix3::from_fn(|i, j| a.get(i, j));
        let mut want: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().cloned().collect();
        want.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for k in 0..3 {
            assert!((e.values[k] - want[k]).abs() <= 1e-10 * (1.0 + a.norm()));
        }
        assert!(e.values[0] <= e.values[1] && e.values[1] <= e.values[2]);
        // Reconstruction and orthonormality.
        let q = nalgebra::Matrix3::from_fn(|i, j| e.vectors[i][j]);
        let lam = nalgebra::Matrix3::from_diagonal(&nalgebra::Vector3::new(e.values[0], e.values[1], e.values[2]));
        assert!((q * lam * q.transpose() - m).norm() <= 1e-13 * m.norm().max(1.0));
        assert!((q.transpose() * q - nalgebra::Matrix3::identity()).norm() <= 1e-13);
    }
}

#[test]
fn degradation_examples() {
    let g = Degradation::Ga.eval(0.0).unwrap();
    assert_eq!((g.g, g.dg, g.ddg), (1.0, -2.0, 2.0));
    let g = Degradation::Ga.eval(0.5).unwrap();
    assert_eq!((g.g, g.dg, g.ddg), (0.25, -1.0, 2.0));
    let gd = Degradation::Gd { b: 2.0 };
    assert_relative_eq!(gd.eval(0.0).unwrap().g, 1.0, epsilon = 1e-15);
    assert!(gd.eval(1.0).unwrap().g.abs() < 1e-15);
    assert!(Degradation::Ga.eval(1.5).is_err());
    assert!(Degradation::Ga.eval(-1e-3).is_err());
}

#[test]
fn crack_density_examples() {
    let l = 0.03125;
    let c = CrackDensity::AT1.eval(l, 0.5, &[0.0, 0.0]).unwrap();
    assert_relative_eq!(c.gamma, 3.0 / (4.0 * 2f64.sqrt() * l) * 0.5, max_relative = 1e-15);
    for d in [0.0, 0.3, 0.9] {
        assert_relative_eq!(CrackDensity::AT2.w(d).0, d * d, epsilon = 1e-15);
    }
    assert_eq!(CrackDensity::AT2.eval(l, 0.0, &[0.0, 0.0]).unwrap().gamma, 0.0);
    assert!(CrackDensity::AT2.eval(l, 1.1, &[0.0, 0.0]).is_err());
}

proptest! {
    #[test]
    fn degradation_is_monotone(d in 0.0f64..=1.0, b in 0.1f64..10.0) {
        for g in [Degradation::Ga, Degradation::Gb, Degradation::Gc, Degradation::Gd { b }] {
            let e = g.eval(d).unwrap();
            prop_assert!(e.dg <= 1e-12);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&e.g));
            // Derivatives against central differences.
            let h = 1e-6;
            let (lo, hi) = ((d - h).max(0.0), (d + h).min(1.0));
            let fd = (g.eval_unchecked(hi).g - g.eval_unchecked(lo).g) / (hi - lo);
            prop_assert!((fd - e.dg).abs() <= 1e-5 * (1.0 + e.dg.abs()));
            let fd2 = (g.eval_unchecked(hi).dg - g.eval_unchecked(lo).dg) / (hi - lo);
            prop_assert!((fd2 - e.ddg).abs() <= 1e-5 * (1.0 + e.ddg.abs()));
        }
    }

    #[test]
    fn density_fields_are_consistent(
        p in proptest::collection::vec(-1.0f64..1.0, 3),
        d in 0.0f64..=1.0,
        split_idx in 0usize..4,
    ) {
        let split = Split::ALL[split_idx];
        let m = model(split);
        let eps = SymTensor::from_packed(2, &p);
        let e = m.psi_eval(&eps, d).unwrap();
        let s = m.split_energy(&eps).unwrap();
        let g = m.degradation(d).unwrap();
        prop_assert_eq!(e.value, (g.g + m.k) * s.psi_plus + s.psi_minus);
        prop_assert_eq!(e.d_second, g.ddg * s.psi_plus);
        prop_assert!((e.mixed - g.dg * s.stress_plus).norm() == 0.0);
    }

    #[test]
    fn rejects_invalid_parameters(mu in -10.0f64..0.0) {
        let mut m = model(Split::Isotropic);
        m.mu = mu;
        prop_assert!(m.validate().is_err());
        let mut m = model(Split::Spectral);
        m.lambda = -1.0;
        prop_assert!(m.psi_eval(&SymTensor::identity(2), 0.0).is_err());
        let mut m = model(Split::Isotropic);
        m.crack.beta = 0.5;
        prop_assert!(m.validate().is_err());
    }
}
