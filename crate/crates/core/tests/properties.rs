use proptest::prelude::*;

use ris_vlc::bench::{rotation_sweep, FrontEndKind, ReceiverFrontEnd};
use ris_vlc::diffraction::{
    fraunhofer_relative_intensity, null_sine, pattern_power_fraction, profile_on_pd, spot_report,
};
use ris_vlc::optics::{
    grating_sine, max_propagating_order, refraction_angle, snell_angle, wavelength_over_slit,
};
use ris_vlc::radiometry::{transmittance, tuning_gain};
use ris_vlc::tuning::{
    solve, solve_depth_for_spot, solve_index_for_angle, Actuator, DesignTarget, FreeVariable,
    LiquidCrystalActuator, MetaLensActuator, TargetMetric,
};
use ris_vlc::{Angle, Error, IncidentWave, SteeringGeometry, Wavelength};

fn wave(nm: f64, inc_deg: f64, order: u32) -> IncidentWave {
    IncidentWave::new(
        Wavelength::from_nm(nm).unwrap(),
        Angle::from_degrees(inc_deg),
        1.0,
        order,
    )
    .unwrap()
}

/// Geometry and wave where the first order propagates with some margin.
fn propagating() -> impl Strategy<Value = (SteeringGeometry, IncidentWave)> {
    (
        2.0..50.0f64,
        0.1..2.0f64,
        0.005..1.0f64,
        1.3..2.4f64,
        300.0..1000.0f64,
        0.0..70.0f64,
    )
        .prop_filter_map("order must propagate", |(a, y, x, n, nm, inc)| {
            let g = SteeringGeometry::new(a, y, x, n).ok()?;
            let w = wave(nm, inc, 1);
            (grating_sine(&g, &w) < 0.999 && null_sine(&g, &w) < 0.99).then_some((g, w))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn angle_decreases_with_index((g, w) in propagating(), dn in 0.001..0.1f64) {
        prop_assume!(g.n_ris() + dn <= 2.5);
        let lo = refraction_angle(&g, &w).unwrap();
        let hi = refraction_angle(&g.with_n_ris(g.n_ris() + dn).unwrap(), &w).unwrap();
        prop_assert!(hi.radians() < lo.radians());
    }

    #[test]
    fn angle_increases_with_wavelength((g, w) in propagating(), dl in 0.5..50.0f64) {
        let nm = w.wavelength().nm() + dl;
        let longer = w.with_wavelength(Wavelength::from_nm(nm).unwrap());
        prop_assume!(grating_sine(&g, &longer) < 1.0);
        let a = refraction_angle(&g, &w).unwrap();
        let b = refraction_angle(&g, &longer).unwrap();
        prop_assert!(b.radians() > a.radians());
    }

    #[test]
    fn zeroth_order_is_snell((g, w) in propagating()) {
        let w0 = w.with_order(0).unwrap();
        let grating = refraction_angle(&g, &w0).unwrap();
        let snell = snell_angle(g.n_air(), g.n_ris(), w.incidence()).unwrap();
        prop_assert!((grating.radians() - snell.radians()).abs() <= 1e-12);
    }

    #[test]
    fn grating_equation_inverts((g, w) in propagating()) {
        let theta = refraction_angle(&g, &w).unwrap();
        let rhs = g.n_air() * w.incidence().sin() + w.order() as f64 * wavelength_over_slit(&g, &w);
        let residual = g.n_ris() * theta.sin() - rhs;
        prop_assert!(residual.abs() <= 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn evanescence_matches_max_order(
        a in 0.2..5.0f64, n in 1.01..2.5f64, nm in 200.0..2000.0f64, inc in 0.0..90.0f64, m in 0u32..=3,
    ) {
        let g = SteeringGeometry::new(a, 1.0, 0.1, n).unwrap();
        let w = wave(nm, inc, m);
        let evanescent = matches!(refraction_angle(&g, &w), Err(Error::EvanescentOrder { .. }));
        let max = max_propagating_order(&g, &w);
        prop_assert_eq!(evanescent, max.is_none_or(|k| k < m));
    }

    #[test]
    fn pattern_power_is_monotone_and_bounded((g, w) in propagating(), h1 in 0.0..2.0f64, h2 in 0.0..2.0f64) {
        let (lo, hi) = if h1 <= h2 { (h1, h2) } else { (h2, h1) };
        let p_lo = pattern_power_fraction(&g, &w, lo).unwrap();
        let p_hi = pattern_power_fraction(&g, &w, hi).unwrap();
        prop_assert!((0.0..=1.0).contains(&p_lo) && (0.0..=1.0).contains(&p_hi));
        prop_assert!(p_lo <= p_hi + 1e-12);
    }

    #[test]
    fn normal_zeroth_order_profile_is_symmetric(
        a in 1.0..20.0f64, y in 0.1..2.0f64, x in 0.01..1.0f64, n in 1.2..2.4f64,
        nm in 400.0..900.0f64, samples in 3usize..400,
    ) {
        let g = SteeringGeometry::new(a, y, x, n).unwrap();
        let p = profile_on_pd(&g, &wave(nm, 0.0, 0), samples).unwrap();
        for i in 0..samples {
            prop_assert_eq!(p.relative_intensity[i], p.relative_intensity[samples - 1 - i]);
        }
    }

    #[test]
    fn nulls_sit_at_multiples_of_medium_wavelength((g, w) in propagating()) {
        let s = null_sine(&g, &w);
        for k in 1..=3 {
            let sine = k as f64 * s;
            if sine < 1.0 {
                let i = fraunhofer_relative_intensity(&g, &w, Angle::from_radians(sine.asin()));
                prop_assert!(i < 1e-10, "k = {k}: {i}");
            }
        }
    }

    #[test]
    fn spot_width_scales_with_depth((g, w) in propagating(), f in 0.1..10.0f64) {
        let deeper = g.with_depth_mm(g.depth_mm() * f).unwrap();
        let r1 = spot_report(&g, &w).unwrap().full_width_mm / g.depth_mm();
        let r2 = spot_report(&deeper, &w).unwrap().full_width_mm / deeper.depth_mm();
        prop_assert!((r1 - r2).abs() <= 1e-12 * r1);
    }

    #[test]
    fn captured_power_never_exceeds_incident((g, w) in propagating(), p in 0.0..100.0f64) {
        let w = w.with_power_w(p).unwrap();
        let t = transmittance(&g, &w).unwrap();
        prop_assert!(t.captured_power_w <= p);
        prop_assert!((0.0..=1.0).contains(&t.value));
    }

    #[test]
    fn cos_factor_is_exact((g, w) in propagating(), inc in 0.0..89.0f64) {
        let w0 = w.with_incidence(Angle::ZERO).unwrap();
        let wi = w.with_incidence(Angle::from_degrees(inc)).unwrap();
        prop_assume!(grating_sine(&g, &wi) < 1.0);
        let t0 = transmittance(&g, &w0).unwrap().value;
        let ti = transmittance(&g, &wi).unwrap().value;
        prop_assume!(t0 > 0.0);
        prop_assert!((ti / t0 - inc.to_radians().cos()).abs() <= 1e-12);
    }

    #[test]
    fn gain_is_antisymmetric_and_bounded((g, w) in propagating(), y2 in 0.1..2.0f64) {
        let other = g.with_depth_mm(y2).unwrap();
        let ab = tuning_gain(&g, &other, &w).unwrap().gain;
        let ba = tuning_gain(&other, &g, &w).unwrap().gain;
        prop_assert_eq!(ab, -ba);
        prop_assert!((-1.0..=1.0).contains(&ab));
        prop_assert_eq!(tuning_gain(&g, &g, &w).unwrap().gain, 0.0);
    }

    #[test]
    fn larger_pd_captures_more((g, w) in propagating(), grow in 1.0..5.0f64) {
        let bigger = g.with_pd_length_mm(g.pd_length_mm() * grow).unwrap();
        let t = transmittance(&g, &w).unwrap().value;
        let t_big = transmittance(&bigger, &w).unwrap().value;
        prop_assert!(t_big + 1e-12 >= t);
    }

    #[test]
    fn actuator_maps_are_monotone(v1 in -10.0..1200.0f64, v2 in -10.0..1200.0f64, n in 1.1..2.0f64) {
        let (lo, hi) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
        let base = SteeringGeometry::new(4.0, 1.0, 0.1, n).unwrap();
        let ml = MetaLensActuator::she2018(base);
        prop_assert!(ml.stretch(lo) <= ml.stretch(hi));
        let lc = LiquidCrystalActuator::sun2019(n).unwrap();
        let (lo_v, hi_v) = (lo / 200.0, hi / 200.0);
        prop_assert!(lc.index(lo_v) <= lc.index(hi_v));
        prop_assert!(lc.index(lo_v) >= n && lc.index(hi_v) <= n + 0.3);
    }

    #[test]
    fn stretch_conserves_volume(v in 0.0..1000.0f64, a in 1.0..50.0f64, y in 0.1..2.0f64) {
        let base = SteeringGeometry::new(a, y, 0.1, 1.5).unwrap();
        let g = MetaLensActuator::she2018(base).apply(v);
        let before = a * a * y;
        let after = g.slit_um() * g.slit_um() * g.depth_mm();
        prop_assert!((after - before).abs() <= 1e-12 * before);
    }

    #[test]
    fn index_solution_decreases_with_target(nm in 400.0..900.0f64, t1 in 5.0..60.0f64, dt in 0.1..20.0f64) {
        let w = wave(nm, 30.0, 1);
        let a = solve_index_for_angle(&w, 4.0, 1.0, Angle::from_degrees(t1));
        let b = solve_index_for_angle(&w, 4.0, 1.0, Angle::from_degrees(t1 + dt));
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!(b < a);
        }
    }

    #[test]
    fn index_design_round_trips((g, w) in propagating()) {
        let theta = refraction_angle(&g, &w).unwrap();
        prop_assume!(theta.degrees() > 0.01);
        let n = solve_index_for_angle(&w, g.slit_um(), g.n_air(), theta).unwrap();
        prop_assert!((n - g.n_ris()).abs() <= 1e-9 * g.n_ris());
    }

    #[test]
    fn depth_design_round_trips((g, w) in propagating(), target in 0.001..5.0f64) {
        let y = solve_depth_for_spot(g.slit_um(), g.n_ris(), &w, target).unwrap();
        let width = spot_report(&g.with_depth_mm(y).unwrap(), &w).unwrap().full_width_mm;
        prop_assert!((width - target).abs() <= 1e-9 * target);
    }

    #[test]
    fn voltage_design_round_trips(v in 3.0..5.0f64, nm in 400.0..800.0f64, inc in 0.0..80.0f64) {
        let base = SteeringGeometry::new(4.0, 0.75, 0.2, 1.5).unwrap();
        let act = Actuator::LiquidCrystal(LiquidCrystalActuator::sun2019(1.5).unwrap());
        let w = wave(nm, inc, 1);
        let theta = refraction_angle(&act.drive(v, &base), &w).unwrap();
        let target = DesignTarget::new(TargetMetric::RefractionAngle(theta), w, base, FreeVariable::Voltage).unwrap();
        let sol = solve(&target, Some(&act)).unwrap();
        prop_assert!(sol.iterations <= 60);
        prop_assert!((sol.achieved - theta.degrees()).abs() <= 1e-6 * theta.degrees());
    }

    #[test]
    fn detection_is_monotone(step in 0.05..10.0f64, kind_idx in 0usize..5) {
        let fe = ReceiverFrontEnd::lens(FrontEndKind::ALL[kind_idx]);
        let s = rotation_sweep(&fe, Angle::from_degrees(step)).unwrap();
        let first_miss = s.detected.iter().position(|d| !d).unwrap_or(s.detected.len());
        prop_assert!(s.detected[first_miss..].iter().all(|d| !d));
        for (d, i) in s.detected.iter().zip(&s.relative_intensity) {
            prop_assert!((0.0..=1.0).contains(i));
            prop_assert!(*d || *i == 0.0);
            prop_assert!(*i <= s.relative_intensity[0]);
        }
    }
}
