//! Property tests for the structural invariants.

use nalgebra::DMatrix;
use proptest::prelude::*;
use weakval::hilbert::{expectation, inner, tensor, Observable, State};
use weakval::weakvalue::{weak_value, wrap_phase, PpsEnsemble};
use weakval::C64;

fn arb_state(dim: usize) -> impl Strategy<Value = State> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
        .prop_filter_map("norm too small", |pairs| {
            State::new(pairs.into_iter().map(|(re, im)| C64::new(re, im)).collect()).ok()
        })
}

fn arb_hermitian(dim: usize) -> impl Strategy<Value = Observable> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |entries| {
        let g = DMatrix::from_fn(dim, dim, |i, j| {
            let (re, im) = entries[i * dim + j];
            C64::new(re, im)
        });
        let h = (&g + g.adjoint()).map(|z| z * 0.5);
        Observable::new(h).expect("symmetrized matrix is Hermitian")
    })
}

proptest! {
    #[test]
    fn cauchy_schwarz_on_normalized_states(
        (a, b) in (2usize..6).prop_flat_map(|d| (arb_state(d), arb_state(d)))
    ) {
        let overlap = inner(&a, &b).unwrap();
        prop_assert!(overlap.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn expectation_stays_inside_the_spectrum(
        (a, psi) in (2usize..6).prop_flat_map(|d| (arb_hermitian(d), arb_state(d)))
    ) {
        let mean = expectation(&a, &psi).unwrap();
        prop_assert!(mean >= a.lambda_min() - 1e-10);
        prop_assert!(mean <= a.lambda_max() + 1e-10);
    }

    #[test]
    fn tensor_marginal_recovers_the_system_factor(
        (a, b) in (2usize..4, 2usize..4)
            .prop_flat_map(|(da, db)| (arb_state(da), arb_state(db)))
    ) {
        let t = tensor(&a, &b);
        let (da, db) = (a.dim(), b.dim());
        // System-major layout: reduced density ρ_ij = Σ_m t[i·db+m]·conj(t[j·db+m]).
        let rho = DMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|m| t.coeff(i * db + m) * t.coeff(j * db + m).conj()).sum()
        });
        let rho = Observable::new(rho).unwrap();
        // A product state has a rank-one system marginal whose top
        // eigenvector is the system factor, up to global phase.
        prop_assert!((rho.lambda_max() - 1.0).abs() < 1e-10);
        let top = State::new(rho.eigenvectors().column(da - 1).iter().copied().collect())
            .unwrap();
        prop_assert!(top.is_same_ray(&a, 1e-8));
    }

    #[test]
    fn weak_values_ignore_global_phases(
        (alpha, beta) in (-3.0f64..3.0, -3.0f64..3.0)
    ) {
        let a = Observable::pauli_z();
        let pre = State::from_reals(&[1.0, 1.0]).unwrap();
        let post = State::from_reals(&[2.0, -1.0]).unwrap();
        let plain = PpsEnsemble::new(pre.clone(), post.clone()).unwrap();
        let rotated = PpsEnsemble::new(
            pre.with_global_phase(alpha),
            post.with_global_phase(beta),
        ).unwrap();
        let w1 = weak_value(&a, &plain).unwrap();
        let w2 = weak_value(&a, &rotated).unwrap();
        prop_assert!((w1 - w2).norm() < 1e-10);
    }

    #[test]
    fn wrapped_phases_land_in_the_principal_interval(x in -50.0f64..50.0) {
        let w = wrap_phase(x);
        prop_assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
        // Wrapping is idempotent and preserves the angle mod 2π.
        prop_assert!((wrap_phase(w) - w).abs() < 1e-12);
        let diff = (x - w) / std::f64::consts::TAU;
        prop_assert!((diff - diff.round()).abs() < 1e-9);
    }
}
