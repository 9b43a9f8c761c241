use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use chaincraft::chain::{defect_of, integrate_chain, ChainConfig, ChainState};
use chaincraft::expr;
use chaincraft::fefferman::{
    geodesic_rhs_explicit, geodesic_rhs_generic, metric_at, null_lift, nullity, signature, ChartPoint,
};
use chaincraft::integrate::{CurveSample, SamplePoint};
use chaincraft::lie::{circles, displayed, hooke, horocycle, LieAlgebraModel, MODEL_NAMES};
use chaincraft::output::{read_csv, write_csv, JsonDocument};
use chaincraft::verify;
use chaincraft::SecondOrderOde;

fn expression(seed: u64, depth: u32) -> String {
    verify::random_expression(&mut ChaCha8Rng::seed_from_u64(seed), depth)
}

fn poly(coeffs: &[f64]) -> SecondOrderOde {
    SecondOrderOde::poly_p(coeffs)
}

fn unit() -> impl Strategy<Value = f64> {
    -1.0..1.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jets_agree_with_finite_differences(seed in any::<u64>()) {
        let worst = verify::jet_fd_disagreement(seed, 1).unwrap();
        prop_assert!(worst < 1e-6, "relative disagreement {worst:e}");
    }

    #[test]
    fn display_round_trips(seed in any::<u64>()) {
        let src = expression(seed, 4);
        let e = expr::parse(&src).unwrap();
        let again = expr::parse(&e.to_string()).unwrap();
        prop_assert_eq!(&again, &e);
        let params = BTreeMap::new();
        let (a, b) = (e.eval::<f64>(0.3, -0.4, 0.9, &params), again.eval::<f64>(0.3, -0.4, 0.9, &params));
        prop_assert_eq!(a.ok(), b.ok());
    }

    #[test]
    fn parser_never_panics(src in "[ -~]{0,512}") {
        if let Ok(e) = expr::parse(&src) {
            let _ = e.eval::<f64>(0.1, 0.2, 0.3, &BTreeMap::new());
        }
    }

    #[test]
    fn parser_never_panics_on_token_soup(seed in any::<u64>()) {
        let src = verify::fuzz_input(&mut ChaCha8Rng::seed_from_u64(seed), true);
        let _ = expr::parse(&src);
    }

    #[test]
    fn cubic_geometries_have_no_defect(
        a in prop::array::uniform4(unit()),
        x in unit(), y in unit(), p in unit(), pp in unit(),
        delta in 0.3..1.0f64, up in any::<bool>(),
    ) {
        let delta = if up { delta } else { -delta };
        let s0 = ChainState::new(x, y, p, p + delta, pp);
        let cfg = ChainConfig::default().with_slope_bound(50.0);
        let curve = integrate_chain(&poly(&a), &s0, x + 0.5, &cfg).unwrap();
        let d = defect_of(&curve).unwrap();
        prop_assert!(d < 1e-8, "defect {d:e}");
    }

    #[test]
    fn explicit_and_generic_accelerations_agree(
        seed in any::<u64>(),
        x in unit(), y in unit(), p in unit(),
        xd in 0.2..1.0f64, delta in 0.2..1.0f64, pd in unit(),
    ) {
        let geoms = [SecondOrderOde::hooke(), SecondOrderOde::from_source(&expression(seed, 3), &BTreeMap::new()).unwrap()];
        for g in &geoms {
            let s = null_lift(g, x, y, p, [xd, p * xd + delta, pd]).unwrap();
            let e = geodesic_rhs_explicit(g, &s).unwrap();
            let a = geodesic_rhs_generic(g, &s).unwrap();
            for k in 0..3 {
                let rel = (e[k] - a[k]).abs() / e[k].abs().max(1.0);
                prop_assert!(rel < 1e-6, "component {k}: {} vs {}", e[k], a[k]);
            }
        }
    }

    #[test]
    fn metric_is_independent_of_tau_and_split(
        a in prop::array::uniform4(unit()),
        x in unit(), y in unit(), p in unit(), tau in -10.0..10.0f64,
    ) {
        let g = poly(&a);
        let m = metric_at(&g, &ChartPoint::new(x, y, p, tau)).unwrap();
        prop_assert_eq!(m, metric_at(&g, &ChartPoint::new(x, y, p, 0.0)).unwrap());
        prop_assert_eq!(signature(&m), (2, 2));
        prop_assert!((m.determinant() - 1.0 / 36.0).abs() < 1e-12);
    }

    #[test]
    fn null_lift_is_null(
        seed in any::<u64>(),
        x in unit(), y in unit(), p in unit(),
        xd in unit(), delta in 0.1..2.0f64, pd in unit(),
    ) {
        let g = SecondOrderOde::from_source(&expression(seed, 3), &BTreeMap::new()).unwrap();
        let s = null_lift(&g, x, y, p, [xd, p * xd + delta, pd]).unwrap();
        let scale = 1.0 + s.vel.iter().map(|v| v * v).sum::<f64>();
        prop_assert!(nullity(&g, &s).unwrap().abs() < 1e-12 * scale);
    }

    #[test]
    fn euler_matches_displayed_and_conserves(p in prop::array::uniform4(-2.0..2.0f64)) {
        for name in MODEL_NAMES {
            let m = LieAlgebraModel::by_name(name).unwrap();
            let shown = displayed::for_model(name).unwrap();
            let (a, b) = (m.euler_rhs(&p), shown(&p));
            for k in 0..4 {
                prop_assert!((a[k] - b[k]).abs() < 1e-13, "{name}: {a:?} vs {b:?}");
            }
            // Conserved quantities are quadratic, so the central difference is exact.
            let eps = 1e-3;
            let plus: [f64; 4] = std::array::from_fn(|k| p[k] + eps * a[k]);
            let minus: [f64; 4] = std::array::from_fn(|k| p[k] - eps * a[k]);
            let (cp, cm) = (m.conserved_values(&plus), m.conserved_values(&minus));
            for k in 0..3 {
                prop_assert!(((cp[k] - cm[k]) / (2.0 * eps)).abs() < 1e-9, "{name}: {cp:?} vs {cm:?}");
            }
        }
    }

    #[test]
    fn hooke_frames_are_unimodular(c in 0.1..3.0f64, tau in -0.7..0.7f64) {
        let (r, h) = hooke::hooke_chain(c, tau).unwrap();
        prop_assert!((hooke::frame_det(r, h) - 1.0).abs() < 1e-12);
        let g = hooke::gchain(c, tau).unwrap();
        prop_assert!((g.determinant() - 1.0).abs() < 1e-10 * (1.0 + g.amax().powi(2)));
    }

    #[test]
    fn horocycle_chains_mirror(c in 0.2..3.0f64, phi in -1.5..1.5f64) {
        if let (Ok((x, y)), Ok((xm, ym))) =
            (horocycle::horocycle_projection(c, phi), horocycle::horocycle_projection(-c, -phi))
        {
            let scale = 1.0 + x.abs() + y.abs();
            prop_assert!((x + xm).abs() < 1e-12 * scale && (y - ym).abs() < 1e-12 * scale);
            prop_assert!(horocycle::normalized_residual(c, x, y).abs() < 1e-9);
            prop_assert!(horocycle::normalized_residual(-c, xm, ym).abs() < 1e-9);
        }
    }

    #[test]
    fn theta_max_is_a_root(c in 0.0..4.0f64) {
        let t = circles::theta_max(c).unwrap();
        prop_assert!((0.0..=std::f64::consts::PI).contains(&t));
        prop_assert!(circles::potential(t, c).abs() < 1e-12);
    }

    #[test]
    fn csv_and_json_round_trip(
        values in prop::collection::vec((-1e300..1e300f64, prop::array::uniform3(any::<f64>())), 1..20),
    ) {
        let values: Vec<[f64; 4]> = values.into_iter().map(|(t, v)| [t, v[0], v[1], v[2]]).collect();
        let mut curve = CurveSample::new("x", vec!["y".into(), "p".into()], vec!["d".into()]);
        for v in &values {
            curve.points.push(SamplePoint { t: v[0], state: vec![v[1], v[2]], diag: vec![v[3]] });
        }
        let mut buf = Vec::new();
        write_csv(&curve, &mut buf).unwrap();
        let from_csv = read_csv(buf.as_slice(), 2).unwrap();
        let json = JsonDocument::new("test", serde_json::Value::Null, &from_csv, &BTreeMap::new())
            .to_string_pretty()
            .unwrap();
        let from_json = JsonDocument::parse(&json).unwrap().curve();
        for ((a, b), c) in curve.points.iter().zip(&from_csv.points).zip(&from_json.points) {
            let original: Vec<f64> = std::iter::once(a.t).chain(a.state.iter().copied()).chain(a.diag.iter().copied()).collect();
            let csv: Vec<f64> = std::iter::once(b.t).chain(b.state.iter().copied()).chain(b.diag.iter().copied()).collect();
            let json: Vec<f64> = std::iter::once(c.t).chain(c.state.iter().copied()).chain(c.diag.iter().copied()).collect();
            for k in 0..original.len() {
                if original[k].is_nan() {
                    prop_assert!(csv[k].is_nan() && json[k].is_nan());
                    continue;
                }
                prop_assert_eq!(original[k].to_bits(), csv[k].to_bits());
                if original[k].is_finite() {
                    prop_assert_eq!(original[k].to_bits(), json[k].to_bits());
                } else {
                    prop_assert!(json[k].is_nan());
                }
            }
        }
    }
}
