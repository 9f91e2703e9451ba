use proptest::prelude::*;

use crate::dynamics::{
    cpb_sweep, propagate, propagate_from_ground, CpbFamily, SolverOptions, TimeReversed,
    TwoLevelFamily,
};
use crate::lz::{cpb_excitation_probability, lz_probability, LzTwoLevel};
use crate::model::{
    cpb_hamiltonian, cpb_transition_frequency, effective_capacitance, flux_hamiltonian,
    ChargeBasis, CpbParams, FluxParams, HermitianMatrix,
};
use crate::optimize::{optimize_cpb, OptimizationProblem};
use crate::output::fmt_num;
use crate::pulse::{PulseSegment, PulseShape};
use crate::rates::usable_efficiency_cpb;

fn hermiticity_error(h: &HermitianMatrix) -> f64 {
    let m = h.entries();
    let scale = m.iter().map(|z| z.norm()).fold(f64::MIN_POSITIVE, f64::max);
    (m - m.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        / scale
}

fn cpb(ej_ghz: f64, eq_ghz: f64) -> CpbParams {
    CpbParams::from_charging_energy(ej_ghz * 1e9, eq_ghz * 1e9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hamiltonians_are_hermitian(ej in 0.1f64..10.0, eq in 1.0f64..40.0, ng in -1.0f64..2.0, dphi in -0.1f64..0.1) {
        let h = cpb_hamiltonian(&cpb(ej, eq), &ChargeBasis::default(), ng).unwrap();
        prop_assert!(hermiticity_error(&h) <= 1e-12);
        let f = flux_hamiltonian(&FluxParams::reference(), dphi).unwrap();
        prop_assert!(hermiticity_error(&f) <= 1e-12);
    }

    #[test]
    fn charge_spectrum_mirrors_about_half(ej in 0.1f64..10.0, eq in 1.0f64..40.0, ng in 0.0f64..1.0) {
        let p = cpb(ej, eq);
        let basis = ChargeBasis::default();
        let a = cpb_hamiltonian(&p, &basis, ng).unwrap().eigenvalues();
        let b = cpb_hamiltonian(&p, &basis, 1.0 - ng).unwrap().eigenvalues();
        let scale = a.last().unwrap().abs().max(1.0);
        for k in 1..a.len() {
            prop_assert!(((a[k] - a[0]) - (b[k] - b[0])).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn two_level_gap_is_smallest_at_degeneracy(ej in 0.1f64..10.0, eq in 1.0f64..40.0, ng in 0.0f64..1.0) {
        let p = cpb(ej, eq);
        prop_assert_eq!(cpb_transition_frequency(&p, 0.5), p.ej_hz);
        prop_assert!(cpb_transition_frequency(&p, ng) >= p.ej_hz);
    }

    #[test]
    fn effective_capacitance_shrinks_with_cutoff(c in 0.1e-15f64..50e-15, k1 in 1e9f64..1e12, k2 in 1e9f64..1e12) {
        let coeff = 3.2e12 * 1e-15;
        prop_assert_eq!(effective_capacitance(c, 0.0, coeff).unwrap(), c);
        let (lo, hi) = if k1 < k2 { (k1, k2) } else { (k2, k1) };
        prop_assume!(hi > lo * (1.0 + 1e-9));
        prop_assert!(effective_capacitance(c, hi, coeff).unwrap() < effective_capacitance(c, lo, coeff).unwrap());
    }

    #[test]
    fn charge_probability_is_the_two_level_formula(ej in 0.1f64..10.0, eq in 1.0f64..40.0, lambda in 1e7f64..1e13) {
        let p = cpb(ej, eq);
        let beta = 2.0 * (2.0 * std::f64::consts::PI * p.charging_energy_hz()) * lambda;
        let a = cpb_excitation_probability(&p, lambda).unwrap();
        let b = lz_probability(&LzTwoLevel::new(p.ej_hz, beta).unwrap()).unwrap();
        prop_assert!((a - b).abs() <= 1e-14 * b.max(1e-300));
    }

    #[test]
    fn report_channels_sum_to_inverse_t1(
        co in 0.1f64..20.0,
        nrms in 0.0f64..5e-3,
        gnr in 0.0f64..1e8,
        lambda in 1e8f64..1e12,
    ) {
        let p = CpbParams { co: co * 1e-15, n_rms: nrms, gamma_nr: gnr, ..CpbParams::reference() };
        let r = usable_efficiency_cpb(&p, lambda, 2.0 * std::f64::consts::PI * 6e9).unwrap();
        prop_assert!(r.gamma_o >= 0.0 && r.gamma_other >= 0.0 && r.gamma_nr >= 0.0 && r.gamma_phi >= 0.0);
        prop_assert!(r.eta >= 0.0 && r.eta <= r.p_ex);
        let total = r.gamma_o + r.gamma_other + r.gamma_nr;
        prop_assert!((1.0 / r.t1 - total).abs() <= 1e-12 * total);
    }

    #[test]
    fn csv_numbers_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let back: f64 = fmt_num(x).parse().unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn two_level_evolution_preserves_probability(d in 0.1f64..4.0, rate_exp in 17.0f64..20.0) {
        let d = d * 1e9;
        let rate = 10f64.powf(rate_exp);
        let x = 30.0 * d.max(rate.sqrt());
        let seg = PulseSegment::new(PulseShape::Linear, -x, x, 2.0 * x / rate).unwrap();
        let r = propagate_from_ground(&TwoLevelFamily { d_hz: d }, &seg, &SolverOptions::default()).unwrap();
        prop_assert!(r.norm_drift <= 1e-9);
        for row in &r.populations {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn reversed_pulse_undoes_the_sweep(shape_idx in 0usize..4, tr_exp in -11.5f64..-9.0, ng_min in 0.05f64..0.3) {
        let fam = CpbFamily::new(CpbParams::from_charging_energy(1e9, 19.27e9), ChargeBasis::default()).unwrap();
        let seg = cpb_sweep(PulseShape::ALL[shape_idx], ng_min, 10f64.powf(tr_exp)).unwrap();
        let opts = SolverOptions::default();
        let fwd = propagate_from_ground(&fam, &seg, &opts).unwrap();
        let psi = fwd.final_state.as_ref().unwrap().conj();
        let back = propagate(&fam, &TimeReversed(&seg), &psi, &opts).unwrap();
        prop_assert!((back.populations.last().unwrap()[0] - 1.0).abs() <= 1e-7);
    }

    #[test]
    fn optimum_respects_its_constraints(nrms in 1e-4f64..2e-3, gnr in 1e5f64..3e7, tr_exp in -11.0f64..-9.0) {
        let p = CpbParams { n_rms: nrms, gamma_nr: gnr, ..CpbParams::reference() };
        let prob = OptimizationProblem::cpb(p, 10f64.powf(tr_exp));
        let r = optimize_cpb(&prob).unwrap();
        if let Some(rep) = r.report {
            prop_assert!(rep.t1 <= prob.constraints.t1_max * (1.0 + 1e-9));
            if let Some(lw) = r.linewidth_limit_hz {
                prop_assert!(rep.linewidth_hz <= lw * (1.0 + 1e-9));
            }
            prop_assert!(rep.eta > 0.0 && rep.eta <= rep.p_ex);
        }
    }
}
