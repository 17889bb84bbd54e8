use std::sync::OnceLock;

use chj_core::chernoff::{ChernoffOperator, Dyadic, DyadicSchedule, SolverConfig};
use chj_core::dominating::{domination_check, DominatingParams};
use chj_core::kernel::tail_young_witness;
use chj_core::oracle::exact_solution;
use chj_core::orlicz::{luxemburg_norm, modular, norm_equivalence_check, Gauge, YoungFunction};
use chj_core::regularity::time_lipschitz_estimate;
use chj_core::{brownian_tail, heat_step, ConjugateTable, GridFunction64, GridSpec64, Hamiltonian64};
use proptest::prelude::*;

fn line() -> GridSpec64 {
    GridSpec64::line(8.0, 256).unwrap()
}

/// Sum of up to four Gaussian bumps well inside the box.
fn bumps() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-1.5..1.5f64, -3.0..3.0f64, 0.3..2.0f64), 1..=4)
}

fn sample(s: GridSpec64, b: &[(f64, f64, f64)]) -> GridFunction64 {
    GridFunction64::from_fn(s, |x| b.iter().map(|&(a, c, w)| a * (-(x[0] - c).powi(2) / w).exp()).sum()).unwrap()
}

fn le(f: &GridFunction64, g: &GridFunction64, tol: f64) -> bool {
    f.max_excess_over(g) <= tol
}

fn op() -> ChernoffOperator<f64> {
    ChernoffOperator::new(Hamiltonian64::quadratic(1.0).unwrap())
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn sup_norm_is_a_norm(a in bumps(), b in bumps(), c in -5.0..5.0f64) {
        let (f, g) = (sample(line(), &a), sample(line(), &b));
        prop_assert!((f.scale(c).sup_norm() - c.abs() * f.sup_norm()).abs() <= 1e-12 * (1.0 + f.sup_norm()));
        prop_assert!((&f + &g).sup_norm() <= f.sup_norm() + g.sup_norm() + 1e-12);
        let grad = f.scale(c).discrete_gradient_sup() - c.abs() * f.discrete_gradient_sup();
        prop_assert!(grad.abs() <= 1e-12 * (1.0 + f.discrete_gradient_sup()));
    }

    #[test]
    fn integral_is_linear(a in bumps(), b in bumps(), al in -3.0..3.0f64, be in -3.0..3.0f64) {
        let (f, g) = (sample(line(), &a), sample(line(), &b));
        let lhs = f.lincomb(al, &g, be).unwrap().integral();
        let rhs = al * f.integral() + be * g.integral();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (al.abs() * f.sup_norm() + be.abs() * g.sup_norm()) + 1e-14);
    }

    #[test]
    fn heat_monotone_and_contractive(a in bumps(), b in bumps(), t in 0.01..1.0f64) {
        let (f, g) = (sample(line(), &a), sample(line(), &b));
        let up = f.zip_with(&g, f64::max).unwrap();
        let (hf, hg, hu) = (heat_step(&f, t).unwrap(), heat_step(&g, t).unwrap(), heat_step(&up, t).unwrap());
        prop_assert!(le(&hf, &hu, 0.0) && le(&hg, &hu, 0.0));
        prop_assert!((&hf - &hg).sup_norm() <= (&f - &g).sup_norm() + 1e-14);
    }

    #[test]
    fn heat_semigroup(a in bumps(), s in 0.05..0.5f64, t in 0.05..0.5f64) {
        // Zero extension past the box breaks the flow property; keep the mass far inside.
        let f = sample(GridSpec64::line(16.0, 512).unwrap(), &a);
        let two = heat_step(&heat_step(&f, s).unwrap(), t).unwrap();
        let d = (&two - &heat_step(&f, s + t).unwrap()).sup_norm();
        prop_assert!(d <= 1e-6, "{d}");
    }

    #[test]
    fn one_step_monotone_contractive(a in bumps(), b in bumps(), k in 2u32..8) {
        let dt = 0.5f64.powi(k as i32);
        let (f, g) = (sample(line(), &a), sample(line(), &b));
        let up = f.zip_with(&g, f64::max).unwrap();
        let o = op();
        let (sf, sg, su) = (o.one_step(&f, dt).unwrap(), o.one_step(&g, dt).unwrap(), o.one_step(&up, dt).unwrap());
        prop_assert!(le(&sf, &su, 0.0) && le(&sg, &su, 0.0));
        prop_assert!((&sf - &sg).sup_norm() <= (&f - &g).sup_norm() + 1e-12);
        let z = o.one_step(&GridFunction64::zeros(line()), dt).unwrap();
        prop_assert_eq!(z.sup_norm(), 0.0);
    }

    #[test]
    fn one_step_convex(a in bumps(), b in bumps(), al in 0.0..=1.0f64, k in 2u32..8) {
        let dt = 0.5f64.powi(k as i32);
        let (f, g) = (sample(line(), &a), sample(line(), &b));
        let o = op();
        let mix = o.one_step(&f.lincomb(al, &g, 1.0 - al).unwrap(), dt).unwrap();
        let chord = o.one_step(&f, dt).unwrap().lincomb(al, &o.one_step(&g, dt).unwrap(), 1.0 - al).unwrap();
        prop_assert!(le(&mix, &chord, 1e-12));
    }

    #[test]
    fn one_step_keeps_lipschitz_constant(a in bumps(), k in 2u32..8) {
        let f = sample(line(), &a);
        let u = op().one_step(&f, 0.5f64.powi(k as i32)).unwrap();
        prop_assert!(u.discrete_gradient_sup() <= f.discrete_gradient_sup() + 10.0 * line().spacing());
    }

    #[test]
    fn iterate_contractive(a in bumps(), b in bumps()) {
        let (f, g) = (sample(line(), &a), sample(line(), &b));
        let t = Dyadic::new(1, 1);
        let o = op();
        let d = (&o.iterate(&f, t, 4).unwrap() - &o.iterate(&g, t, 4).unwrap()).sup_norm();
        prop_assert!(d <= (&f - &g).sup_norm() + 1e-12);
    }

    #[test]
    fn oracle_monotone_convex_above_heat(a in bumps(), b in bumps(), al in 0.0..=1.0f64, t in 0.05..1.0f64) {
        let (f, g) = (sample(line(), &a), sample(line(), &b));
        let up = f.zip_with(&g, f64::max).unwrap();
        let (uf, ug) = (exact_solution(&f, t).unwrap(), exact_solution(&g, t).unwrap());
        let uu = exact_solution(&up, t).unwrap();
        // Log-sum-exp rescales by each row maximum, so monotonicity holds to rounding.
        prop_assert!(le(&uf, &uu, 1e-14) && le(&ug, &uu, 1e-14));
        let mix = exact_solution(&f.lincomb(al, &g, 1.0 - al).unwrap(), t).unwrap();
        prop_assert!(le(&mix, &uf.lincomb(al, &ug, 1.0 - al).unwrap(), 1e-10));
        prop_assert!(le(&heat_step(&f, t).unwrap(), &uf, 1e-10));
    }

    #[test]
    fn luxemburg_homogeneous_monotone(a in bumps(), c in -4.0..4.0f64, shrink in 0.0..=1.0f64, r in 1.0..10.0f64) {
        let y = YoungFunction::new(9.0).unwrap();
        let f = sample(line(), &a);
        let n = luxemburg_norm(&f, r, &y).unwrap();
        let nc = luxemburg_norm(&f.scale(c), r, &y).unwrap();
        prop_assert!((nc - c.abs() * n).abs() <= 1e-10 * (1.0 + nc));
        let small = f.scale(shrink);
        prop_assert!(luxemburg_norm(&small, r, &y).unwrap() <= n + 1e-10);
        if n > 0.0 {
            prop_assert!((modular(&f, n, &y) - r).abs() <= 1e-8 * r);
        }
    }

    #[test]
    fn norm_equivalence(a in bumps(), r in prop::sample::select(vec![1.0, 2.0, 10.0])) {
        let y = YoungFunction::new(9.0).unwrap();
        let e = norm_equivalence_check(&sample(line(), &a), r, &y).unwrap();
        prop_assert!(e.lhs_ok && e.rhs_ok, "{e:?}");
    }

    #[test]
    fn t_op_monotone_and_superlinear(a in bumps(), shrink in 0.0..=1.0f64, c in 1.0..4.0f64, t in 0.01..0.5f64) {
        let p = DominatingParams::from_growth_constant(0.5).unwrap();
        let f = sample(line(), &a).abs();
        let small = f.scale(shrink);
        let tf = p.t_op(&f, t).unwrap();
        prop_assert!(le(&p.t_op(&small, t).unwrap(), &tf, 0.0));
        let tc = p.t_op(&f.scale(c), t).unwrap();
        prop_assert!(le(&tf.scale(c), &tc, 1e-8));
    }

    #[test]
    fn domination_of_iterates(a in bumps()) {
        let h = Hamiltonian64::quadratic(1.0).unwrap();
        let params = DominatingParams::from_growth_constant(h.growth_constant()).unwrap();
        let cfg = SolverConfig::new(line(), h, DyadicSchedule::range(Dyadic::new(1, 2), 2, 5).unwrap());
        let rep = domination_check(&sample(line(), &a), &cfg, &params).unwrap();
        prop_assert!(rep.max_violation() <= 1e-6, "{rep:?}");
    }
}

fn table(h: &Hamiltonian64) -> ConjugateTable<f64> {
    ConjugateTable::build(h, 12.0, 481).unwrap()
}

fn quad_table() -> &'static (Hamiltonian64, ConjugateTable<f64>) {
    static T: OnceLock<(Hamiltonian64, ConjugateTable<f64>)> = OnceLock::new();
    T.get_or_init(|| {
        let h = Hamiltonian64::quadratic(1.0).unwrap();
        let t = table(&h);
        (h, t)
    })
}

fn power_table() -> &'static (Hamiltonian64, ConjugateTable<f64>) {
    static T: OnceLock<(Hamiltonian64, ConjugateTable<f64>)> = OnceLock::new();
    T.get_or_init(|| {
        let h = Hamiltonian64::power(1.0, 1.5).unwrap();
        let t = table(&h);
        (h, t)
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn fenchel_round_trip(x in -4.0..4.0f64, power in any::<bool>()) {
        let (h, t) = if power { power_table() } else { quad_table() };
        let err = (t.biconjugate(&[x]) - h.eval(&[x])).abs();
        prop_assert!(err <= 5.0 * t.spacing() * (1.0 + x.abs()), "x = {x}: {err}");
    }
}

#[test]
fn conjugate_growth_and_minimum() {
    for (h, t) in [quad_table(), power_table()] {
        let k = h.growth_constant();
        assert!(t.min_value().abs() <= 1e-8);
        for (i, &v) in t.values().iter().enumerate() {
            let l = t.lambda(i)[0].abs();
            if v.is_finite() && l >= 2.0 * k {
                assert!(v >= l * l / (16.0 * k) - 1e-8);
            }
        }
        let v = t.values();
        for i in 1..v.len() - 1 {
            if v[i - 1].is_finite() && v[i + 1].is_finite() {
                assert!(v[i] <= 0.5 * (v[i - 1] + v[i + 1]) + 1e-8, "node {i}");
            }
        }
    }
}

#[test]
fn brownian_tail_grid() {
    for dim in [1, 2] {
        for r in [8.0, 10.0, 12.0, 16.0] {
            for t in [0.01f64, 0.05, 0.1] {
                assert!(brownian_tail(r, t, dim) <= t * (-r / t).exp(), "r={r} t={t} d={dim}");
            }
        }
    }
}

#[test]
fn tail_times_young_vanishes() {
    let b = 9.0;
    let y = YoungFunction::new(b).unwrap();
    let ks: Vec<u32> = (4..=14).collect();
    for c in [1.0, 5.0] {
        let w = tail_young_witness(c, b, 8.0, &ks, 1, |u| y.ln_phi(u));
        assert!(w.windows(2).all(|p| p[1] < p[0]), "c={c}: {w:?}");
        assert!(*w.last().unwrap() < 1e-10f64.ln());
    }
}

fn smooth_bump(s: GridSpec64) -> GridFunction64 {
    GridFunction64::from_fn(s, |x| {
        let r2: f64 = x[0] * x[0] / 4.0;
        if r2 < 1.0 { (-1.0 / (1.0 - r2)).exp() * 2.0 } else { 0.0 }
    })
    .unwrap()
}

#[test]
fn symmetric_time_lipschitz() {
    let s = GridSpec64::line(10.0, 512).unwrap();
    let h = Hamiltonian64::quadratic(1.0).unwrap();
    let cfg = SolverConfig::new(s, h, DyadicSchedule::new(Dyadic::new(1, 0), vec![6]).unwrap());
    let times: Vec<Dyadic> = (1..=8).map(|i| Dyadic::new(i, 3)).collect();
    let f = smooth_bump(s);
    let gp = time_lipschitz_estimate(&f, &cfg, &times).unwrap().gamma;
    let gm = time_lipschitz_estimate(&f.scale(-1.0), &cfg, &times).unwrap().gamma;
    assert!(gp.is_finite() && gm.is_finite());
    assert!(gm <= 4.0 * gp && gp <= 4.0 * gm, "{gp} {gm}");

    // The reported constant bounds every sampled pair.
    let traj = cfg.operator().unwrap().trajectory(&f, Dyadic::new(1, 0), 6).unwrap();
    for &s1 in &times {
        for &s2 in &times {
            let (i, j) = (s1.steps_at(6).unwrap() as usize, s2.steps_at(6).unwrap() as usize);
            let gap = (s1.value::<f64>() - s2.value::<f64>()).abs();
            assert!((&traj[i] - &traj[j]).sup_norm() <= gp * gap + 1e-8);
        }
    }
}
