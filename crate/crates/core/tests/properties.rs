use std::f64::consts::PI;
use std::sync::OnceLock;

use proptest::prelude::*;

use nodesum_core::eigensolver::{orthonormality_matrix, sign_changes};
use nodesum_core::greenfn::GKernel;
use nodesum_core::summation::compensated_sum;
use nodesum_core::sumrules::*;
use nodesum_core::susy::{partner_potential_at, PartnerProblem};
use nodesum_core::waveanalysis::{default_anchor, second_solution_with_derivative, wronskian};
use nodesum_core::{analytic_box_spectrum, analytic_sho_spectrum, build_grid, solve_numeric, PotentialSpec, Spectrum};

fn box_analytic() -> &'static Spectrum {
    static S: OnceLock<Spectrum> = OnceLock::new();
    S.get_or_init(|| analytic_box_spectrum(&build_grid(0.0, PI, 2001).unwrap(), 400).unwrap())
}

fn oscillator() -> &'static Spectrum {
    static S: OnceLock<Spectrum> = OnceLock::new();
    S.get_or_init(|| analytic_sho_spectrum(&build_grid(-8.0, 8.0, 2001).unwrap(), 800).unwrap())
}

fn box_numeric() -> &'static Spectrum {
    static S: OnceLock<Spectrum> = OnceLock::new();
    S.get_or_init(|| solve_numeric(&PotentialSpec::particle_in_box(), &build_grid(0.0, PI, 1001).unwrap(), 12).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn numeric_states_are_orthonormal_with_right_node_counts(n in 101usize..401, count in 2usize..8) {
        let s = solve_numeric(&PotentialSpec::particle_in_box(), &build_grid(0.0, PI, n).unwrap(), count).unwrap();
        prop_assert!(orthonormality_matrix(&s).max_deviation < 1e-10);
        for st in &s.states {
            prop_assert_eq!(sign_changes(&st.values), st.index - 1);
        }
        let e = s.energies();
        prop_assert!(e.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn kernel_is_symmetric(r in 0.05f64..3.09, t in 0.05f64..3.09, n in 1usize..4) {
        let k = GKernel::new(box_analytic(), n, 200).unwrap();
        prop_assert_eq!(k.value(r, t).unwrap(), k.value(t, r).unwrap());
    }

    #[test]
    fn second_solution_has_unit_wronskian(frac in 0.05f64..0.95, n in 1usize..4) {
        let s = box_analytic();
        let st = s.state(n).unwrap();
        let wall = PI * (n - 1) as f64 / n as f64;
        let r = wall + frac * (PI - wall);
        let pair = second_solution_with_derivative(st, default_anchor(st).unwrap(), &[r]).unwrap()[0];
        prop_assert!((wronskian(st.eval(r).unwrap(), pair) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn two_particle_terms_match_pair_terms(a in 0.1f64..3.0, b in 0.1f64..3.0) {
        prop_assume!((a - b).abs() > 1e-3);
        let s = box_analytic();
        let pair = pair_integral_rule(s, 1, a, b, 200).unwrap();
        let two = two_particle_rule(s, 1, a, b, 200).unwrap();
        let weight = 0.5 * (s.states[0].eval(a).unwrap().0 * s.states[0].eval(b).unwrap().0).powi(2);
        for (p, t) in pair.lhs_partials.iter().zip(&two.lhs_partials) {
            prop_assert!((weight * p.value - t.value).abs() <= 1e-12 * t.value.abs().max(1e-300));
        }
        prop_assert!((weight * pair.rhs_value - two.rhs_value).abs() <= 1e-12 * two.rhs_value.abs());
    }

    #[test]
    fn global_sign_leaves_reports_unchanged(a in 0.2f64..1.5, b in 1.6f64..3.0) {
        for s in [box_analytic(), box_numeric()] {
            let flip = s.negated();
            let j = s.max_truncation().min(200);
            let pairs = [
                (pair_integral_rule(s, 1, a, b, j).unwrap(), pair_integral_rule(&flip, 1, a, b, j).unwrap()),
                (node_rule_quadratic(s, 2, PI / 2.0, j).unwrap(), node_rule_quadratic(&flip, 2, PI / 2.0, j).unwrap()),
            ];
            for (p, m) in pairs {
                prop_assert_eq!(serde_json::to_string(&p).unwrap(), serde_json::to_string(&m).unwrap());
            }
        }
    }

    #[test]
    fn partner_ground_solution_solves_partner_equation(frac in 0.1f64..0.9) {
        let s = box_analytic();
        let r = PI / 2.0 + frac * PI / 2.0;
        let phi = |x: f64| 1.0 / s.states[1].eval(x).unwrap().0;
        let residual = |d: f64| {
            let second = (phi(r + d) - 2.0 * phi(r) + phi(r - d)) / (d * d);
            (-second + (partner_potential_at(s, 2, r).unwrap() - 4.0) * phi(r)).abs()
        };
        let (coarse, fine) = (residual(2e-3), residual(1e-3));
        prop_assert!(fine < 1e-2 * phi(r).abs());
        prop_assert!(fine <= 0.3 * coarse + 1e-9, "{} {}", coarse, fine);
    }
}

#[test]
fn node_sum_is_order_independent() {
    let s = box_analytic();
    let r = node_rule_linear(s, 2, PI / 2.0, 400).unwrap();
    let terms: Vec<f64> = (1..=400)
        .filter(|&j| j != 2)
        .map(|j| s.states[j - 1].eval(PI / 2.0).unwrap().0.powi(2) / (4.0 - (j * j) as f64))
        .collect();
    let forward = r.lhs_partials.last().unwrap().value;
    let reversed = compensated_sum(terms.iter().rev().copied());
    assert!((forward - reversed).abs() < 1e-12);
}

#[test]
fn absolute_rule_tails_shrink_on_doubling() {
    let s = box_analytic();
    for r in [
        node_rule_quadratic(s, 2, PI / 2.0, 400).unwrap(),
        extremum_rule_quadratic(s, 1, PI / 2.0, 400).unwrap(),
        groundstate_rule(s, 400).unwrap(),
    ] {
        let at = |j: f64| r.lhs_partials.iter().find(|p| p.at == j).unwrap().value;
        let (d1, d2) = ((at(200.0) - at(100.0)).abs(), (at(400.0) - at(200.0)).abs());
        assert!(d1 >= 1.8 * d2, "{:?}: {d1} vs {d2}", r.rule_id);
    }
}

#[test]
fn abel_orders_agree() {
    let r = extremum_rule_linear(oscillator(), 1, 0.0, &AbelSchedule::default()).unwrap();
    let value = r.lhs_value.unwrap();
    assert!(r.diagnostics["order_spread"] <= 0.1 * value.abs());
    assert!(r.lhs_partials.iter().all(|p| p.value.is_finite()));
}

#[test]
fn walled_ground_state_is_renormalized_state() {
    let p = PartnerProblem::build(box_numeric(), 2, 4).unwrap();
    assert!(p.ground_mismatch() < 1e-4);
    let walled = &p.walled_spectrum.states[0];
    let dev = walled
        .values
        .iter()
        .zip(&p.renormalized_psi_n.values)
        .map(|(a, b)| (a - b).abs().min((a + b).abs()))
        .fold(0.0, f64::max);
    assert!(dev < 1e-4, "{dev}");
    assert!((p.wronskian_w - 0.5).abs() < 1e-6);
}
