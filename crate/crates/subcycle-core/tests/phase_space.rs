use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use subcycle_core::phase_space::*;
use subcycle_core::Error;

/// Truncated Fock space, large enough that the 40 lowest levels see no edge.
const DIM: usize = 160;
const LEVELS: usize = 40;

fn ladder() -> DMatrix<Complex64> {
    DMatrix::from_fn(DIM, DIM, |i, k| if k == i + 1 { Complex64::new((k as f64).sqrt(), 0.0) } else { Complex64::default() })
}

/// `exp(-i H)` for Hermitian `H`.
fn unitary(h: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l)));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// Pure state `S(r)|n>` where the squeezer stretches x by `e^r`.
fn squeezed_fock(r: f64, n: usize) -> DVector<Complex64> {
    let a = ladder();
    let ad = a.adjoint();
    // S = exp(r (a^dag^2 - a^2) / 2) = exp(-i K) with K = i r (a^dag^2 - a^2) / 2.
    let k = (&ad * &ad - &a * &a) * Complex64::new(0.0, 0.5 * r);
    let mut e = DVector::zeros(DIM);
    e[n] = Complex64::new(1.0, 0.0);
    unitary(&k) * e
}

/// `Tr[rho exp(-i(u X + v P))]` restricted to the lowest `LEVELS` levels.
fn brute_charfn(psi: &DVector<Complex64>, u: f64, v: f64) -> Complex64 {
    let a = ladder();
    let ad = a.adjoint();
    let s2 = 2f64.sqrt();
    let x = (&a + &ad) / Complex64::new(s2, 0.0);
    let p = (&a - &ad) / Complex64::new(0.0, s2);
    let d = unitary(&(x * Complex64::new(u, 0.0) + p * Complex64::new(v, 0.0)));
    let low = psi.rows(0, LEVELS).into_owned();
    let dl = d.view((0, 0), (LEVELS, LEVELS));
    low.dotc(&(dl * &low))
}

#[test]
fn subtracted_factor_matches_fock_space() {
    let r = 0.3;
    let sq = squeezed_fock(r, 0);
    let a = ladder();
    let sub = &a * &sq;
    let sub = &sub / Complex64::new(sub.norm(), 0.0);
    assert!((sub.norm_squared() - sub.rows(0, LEVELS).norm_squared()).abs() < 1e-14);
    for &u in &[-2.0, -1.0, 0.0, 0.5, 1.5] {
        for &v in &[-1.5, -0.5, 0.0, 1.0, 2.0] {
            let want = brute_charfn(&sub, u, v);
            let got = single_mode_sub_charfn(r, u, v).unwrap();
            assert!((got - want).norm() < 1e-6, "({u}, {v}): {got} vs {want}");
            let want = brute_charfn(&sq, u, v);
            assert!((squeezed_charfn(r, u, v) - want.re).abs() < 1e-6 && want.im.abs() < 1e-6);
        }
    }
}

#[test]
fn subtraction_from_vacuum_is_degenerate() {
    assert!(matches!(single_mode_sub_charfn(0.0, 0.1, 0.1), Err(Error::DegenerateSubtraction)));
    assert!(matches!(SubtractedState::from_squeezing(&[0.0, 0.0]), Err(Error::DegenerateSubtraction)));
}

fn sample_thetas() -> (Vec<Complex64>, f64, Vec<f64>) {
    let th = vec![Complex64::from_polar(0.6, 0.3), Complex64::from_polar(0.3, -1.0)];
    let tv = (1.0 - th.iter().map(|t| t.norm_sqr()).sum::<f64>()).sqrt();
    (th, tv, vec![0.281, 0.046])
}

fn sup(a: &WignerGrid, b: &WignerGrid) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn gaussian_routes_agree() {
    let (th, tv, r) = sample_thetas();
    let uv = Axis::centered(14.0, 281);
    let xp = Axis::centered(5.0, 101);
    let cf = charfn_psq(&th, tv, &r, uv, uv);
    let via_fourier = wigner_from_charfn(&cf, xp, xp).unwrap();
    let closed = gaussian_density(&covariance_from_thetas(&th, tv, &r), xp, xp);
    assert!(sup(&via_fourier, &closed) < 1e-6, "{}", sup(&via_fourier, &closed));
    assert!((closed.integral() - 1.0).abs() < 1e-4);
}

#[test]
fn subtracted_routes_agree() {
    let (th, tv, r) = sample_thetas();
    let sub = SubtractedState::from_squeezing(&r).unwrap();
    let uv = Axis::centered(14.0, 281);
    let xp = Axis::centered(5.0, 101);
    let cf = charfn_sub(&sub, &th, tv, &r, uv, uv);
    assert!((cf.at(140, 140) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    let via_fourier = wigner_from_charfn(&cf, xp, xp).unwrap();
    let state = covariance_from_thetas(&th, tv, &r);
    let mats: Vec<Mat2> = th.iter().zip(&r).map(|(t, rj)| mode_matrix(*t, *rj)).collect();
    let closed = subtracted_density(&state, &mats, &sub.weights, xp, xp);
    assert!(sup(&via_fourier, &closed) < 1e-6, "{}", sup(&via_fourier, &closed));
    assert!((closed.integral() - 1.0).abs() < 1e-4);
}

#[test]
fn truncated_charfn_is_rejected() {
    let (th, tv, r) = sample_thetas();
    let uv = Axis::centered(3.0, 31);
    let cf = charfn_psq(&th, tv, &r, uv, uv);
    assert!(matches!(wigner_from_charfn(&cf, uv, uv), Err(Error::GridTruncation { .. })));
}

#[test]
fn purity_parseval() {
    // Pure single-mode squeezed vacuum: 2 pi int W^2 = 1 = (2 pi)^-1 int |W~|^2.
    let r = [0.4];
    let th = [Complex64::new(1.0, 0.0)];
    let xp = Axis::centered(6.0, 241);
    let w = gaussian_density(&covariance_from_thetas(&th, 0.0, &r), xp, xp);
    let purity = 2.0 * PI * w.values.iter().map(|x| x * x).sum::<f64>() * w.cell();
    assert!((purity - 1.0).abs() < 1e-4, "purity {purity}");
    let uv = Axis::centered(16.0, 321);
    let cf = charfn_psq(&th, 0.0, &r, uv, uv);
    let dual = cf.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * uv.step * uv.step / (2.0 * PI);
    assert!((dual - purity).abs() < 1e-4, "{dual} vs {purity}");
}

#[test]
fn fock_states_on_the_grid() {
    let xp = Axis::centered(6.0, 241);
    let vac = WignerGrid::from_fn(xp, xp, |x, p| fock_wigner(0, x, p));
    let one = WignerGrid::from_fn(xp, xp, |x, p| fock_wigner(1, x, p));
    assert!((one.integral() - 1.0).abs() < 1e-4);
    assert!((one.origin_value() + 1.0 / PI).abs() < 1e-12);
    let p0 = photon_probabilities(&vac, 2);
    assert!((p0[0] - 1.0).abs() < 1e-4 && p0[1] < 1e-4 && p0[2] < 1e-4);
    let p1 = photon_probabilities(&one, 2);
    assert!((p1[1] - 1.0).abs() < 1e-4 && p1[0] < 1e-4);
    let g = gaussian_density(&GaussianState::vacuum(), xp, xp);
    assert!(sup(&g, &vac) < 1e-14);
}

#[test]
fn weak_subtraction_approaches_a_lossy_photon() {
    let xp = Axis::centered(5.0, 101);
    for &t1 in &[1.0f64, 0.7, 0.3] {
        let th = [Complex64::new(t1.sqrt(), 0.0)];
        let r = [1e-4];
        let sub = SubtractedState::from_squeezing(&r).unwrap();
        let state = covariance_from_thetas(&th, (1.0 - t1).sqrt(), &r);
        let mats = [mode_matrix(th[0], r[0])];
        let w = subtracted_density(&state, &mats, &sub.weights, xp, xp);
        assert!((w.origin_value() - (1.0 - 2.0 * t1) / PI).abs() < 1e-3, "T1 = {t1}");
        if t1 == 1.0 {
            let one = WignerGrid::from_fn(xp, xp, |x, p| fock_wigner(1, x, p));
            assert!(sup(&w, &one) < 1e-3);
        }
    }
}

#[test]
fn hilbert_schmidt_distance() {
    let xp = Axis::centered(5.0, 101);
    let a = gaussian_density(&GaussianState::vacuum(), xp, xp);
    assert_eq!(hs_distance(&a, &a).unwrap(), 0.0);
    let b = WignerGrid::from_fn(xp, xp, |x, p| fock_wigner(1, x, p));
    // Orthogonal pure states: 2 pi int (W0 - W1)^2 = 1 + 1 - 0.
    assert!((hs_distance(&a, &b).unwrap() - 2.0).abs() < 1e-4);
    let c = gaussian_density(&GaussianState::vacuum(), Axis::centered(5.0, 51), xp);
    assert!(matches!(hs_distance(&a, &c), Err(Error::GridMismatch)));
}

fn thetas() -> impl Strategy<Value = (Vec<Complex64>, Vec<f64>)> {
    prop::collection::vec((0.0f64..1.0, -PI..PI, 0.0f64..2.0), 1..5).prop_map(|v| {
        let norm: f64 = v.iter().map(|x| x.0 * x.0).sum::<f64>().max(1.0);
        let th = v.iter().map(|x| Complex64::from_polar(x.0 / norm.sqrt(), x.1)).collect();
        (th, v.iter().map(|x| x.2).collect())
    })
}

proptest! {
    #[test]
    fn covariance_respects_uncertainty((th, r) in thetas()) {
        let tv = (1.0 - th.iter().map(|t| t.norm_sqr()).sum::<f64>()).max(0.0).sqrt();
        let s = covariance_from_thetas(&th, tv, &r);
        prop_assert!(s.det() >= 0.25 - 1e-9 * (1.0 + s.det()));
        let (vmin, vmax) = s.eigenvalues();
        prop_assert!(vmin > 0.0 && vmax >= vmin);
        prop_assert_eq!(s.cov[0][1], s.cov[1][0]);
    }

    #[test]
    fn subtraction_weights_are_a_distribution(r in prop::collection::vec(0.001f64..2.0, 1..6)) {
        let s = SubtractedState::from_squeezing(&r).unwrap();
        prop_assert!(s.weights.iter().all(|&w| w >= 0.0));
        prop_assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn charfn_is_one_at_origin((th, r) in thetas()) {
        let tv = (1.0 - th.iter().map(|t| t.norm_sqr()).sum::<f64>()).max(0.0).sqrt();
        let ax = Axis::centered(1.0, 3);
        let sub = SubtractedState::from_squeezing(&r.iter().map(|x| x + 0.01).collect::<Vec<_>>()).unwrap();
        prop_assert!((charfn_psq(&th, tv, &r, ax, ax).at(1, 1).re - 1.0).abs() < 1e-14);
        prop_assert!((charfn_sub(&sub, &th, tv, &r, ax, ax).at(1, 1).re - 1.0).abs() < 1e-14);
    }
}
