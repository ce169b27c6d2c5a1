use mmit::model::{hz, SystemParams, ValidatedParams};
use mmit::response::{
    cavity_amplitude, cavity_amplitude_closed_form, h_coefficients, script_h_coefficients, CascadeVariant, Engine,
};
use mmit::Complex;
use proptest::prelude::*;

fn rel(a: Complex, b: Complex) -> f64 {
    (a - b).norm() / b.norm()
}

fn band(p: &SystemParams, n: usize) -> impl Iterator<Item = f64> + '_ {
    (0..n).map(move |k| (0.5 + k as f64 / (n - 1) as f64) * p.omega_b)
}

fn preset_with_gc(mhz: f64) -> ValidatedParams {
    SystemParams::reference_preset().with_opto_hz(mhz * 1e6).validate().unwrap()
}

/// Error-free transformations for a double-double re-evaluation of the
/// coefficients.
mod dd {
    pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        (p, a.mul_add(b, -p))
    }

    /// Sum of double-double values, rounded to the nearest f64.
    pub fn sum(terms: &[(f64, f64)]) -> f64 {
        let mut hi = 0.0;
        let mut lo = 0.0;
        for &(a, b) in terms {
            let (s, e) = two_sum(hi, a);
            hi = s;
            lo += e + b;
        }
        let (s, e) = two_sum(hi, lo);
        s + e
    }
}

#[test]
fn h_coefficients_match_double_double() {
    let p = preset_with_gc(4.0);
    let exact = |a: f64, b: f64| dd::sum(&[(a, 0.0), (b, 0.0)]);
    let points = [
        p.omega_b,
        p.omega_b * (1.0 + 1e-9),
        p.omega_b * (1.0 - 3e-7),
        0.5 * p.omega_b,
        2.28e8,
        2.69e8,
        1.37 * p.omega_b,
    ];
    for delta in points {
        let h = h_coefficients(&p, delta);
        let (wb2, wb2_err) = dd::two_prod(p.omega_b, p.omega_b);
        let (d2, d2_err) = dd::two_prod(delta, delta);
        let mech = dd::sum(&[(wb2, wb2_err), (-d2, -d2_err)]);
        let damp = dd::two_prod(p.gamma_b, delta);
        let damp = dd::sum(&[damp]);
        let expected = [
            (h.h1, Complex::new(p.gamma_a, exact(p.delta_a, -delta))),
            (h.h2, Complex::new(p.gamma_a, exact(p.delta_a, delta))),
            (h.h3, Complex::new(p.kappa_c, exact(p.delta_c_eff, -delta))),
            (h.h4, Complex::new(p.kappa_c, exact(p.delta_c_eff, delta))),
            (h.h5, Complex::new(p.kappa_n, exact(p.delta_n_eff, -delta))),
            (h.h6, Complex::new(p.kappa_n, exact(p.delta_n_eff, delta))),
            (h.h7, Complex::new(mech, -damp)),
            (h.h8, Complex::new(mech, damp)),
        ];
        for (k, (got, want)) in expected.iter().enumerate() {
            assert!(rel(*got, *want) <= 1e-14, "h{} at {delta:e}: {got} vs {want}", k + 1);
        }
        assert_eq!(h.h8, h.h7.conj());
    }
    let h = h_coefficients(&p, 0.3 * p.omega_b);
    let mirrored = h_coefficients(&p, -0.3 * p.omega_b);
    assert_eq!(h.h2, mirrored.h1);
}

#[test]
fn cascade_variants_coincide_without_optomechanics() {
    let p = preset_with_gc(0.0);
    let worst = band(&p, 2001)
        .map(|d| {
            let o = cavity_amplitude(Engine::Oracle, &p, d).unwrap();
            let printed = cavity_amplitude_closed_form(&p, d, CascadeVariant::Printed).unwrap();
            let corrected = cavity_amplitude_closed_form(&p, d, CascadeVariant::Corrected).unwrap();
            assert_eq!(printed, corrected);
            rel(printed, o)
        })
        .fold(0.0, f64::max);
    assert!(worst <= 1e-8, "{worst:e}");
}

#[test]
fn atom_cavity_lorentzian_without_optomechanics() {
    let p = preset_with_gc(0.0);
    for d in band(&p, 401) {
        let h = h_coefficients(&p, d);
        let expected = p.eps_p / (h.h3 + p.g_atom * p.g_atom / h.h1);
        let c = cavity_amplitude_closed_form(&p, d, CascadeVariant::Printed).unwrap();
        assert!(rel(c, expected) < 1e-12);
    }
}

#[test]
fn corrected_cascade_equals_oracle_at_preset() {
    for mhz in [2.0, 4.0, 4.93, 5.0, 6.0, 8.0] {
        let p = preset_with_gc(mhz);
        let worst = band(&p, 2001)
            .map(|d| {
                let o = cavity_amplitude(Engine::Oracle, &p, d).unwrap();
                let c = cavity_amplitude(Engine::ClosedCorrected, &p, d).unwrap();
                rel(c, o)
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-10, "G_c/2π = {mhz} MHz: {worst:e}");
    }
}

#[test]
fn printed_cascade_departs_from_oracle_with_optomechanics() {
    let p = preset_with_gc(4.0);
    let worst = band(&p, 2001)
        .map(|d| {
            let o = cavity_amplitude(Engine::Oracle, &p, d).unwrap();
            let c = cavity_amplitude(Engine::ClosedPrinted, &p, d).unwrap();
            rel(c, o)
        })
        .fold(0.0, f64::max);
    eprintln!("printed vs oracle at G_c/2π = 4 MHz: max rel diff {worst:e}");
    assert!(worst > 1e-6);

    let h = h_coefficients(&p, p.omega_b);
    let printed = script_h_coefficients(&h, &p, CascadeVariant::Printed).unwrap();
    let corrected = script_h_coefficients(&h, &p, CascadeVariant::Corrected).unwrap();
    eprintln!("coefficient   printed                         corrected");
    for (name, a, b) in [
        ("H1", printed.h1, corrected.h1),
        ("H2", printed.h2, corrected.h2),
        ("H3", printed.h3, corrected.h3),
        ("H4", printed.h4, corrected.h4),
        ("H5", printed.h5, corrected.h5),
        ("H6", printed.h6, corrected.h6),
    ] {
        eprintln!("{name:<13} {a:<31.6e} {b:.6e}");
    }
    // For real couplings only the G_c term of H4 differs.
    assert_eq!(printed.h1, corrected.h1);
    assert_eq!(printed.h2, corrected.h2);
    assert_eq!(printed.h3, corrected.h3);
    assert_ne!(printed.h4, corrected.h4);
}

#[test]
fn engines_agree_with_all_couplings_off() {
    let mut p = SystemParams::reference_preset();
    p.g_opto = Complex::new(0.0, 0.0);
    p.g_magno = Complex::new(0.0, 0.0);
    p.g_atom = 0.0;
    let p = p.validate().unwrap();
    for d in band(&p, 201) {
        let o = cavity_amplitude(Engine::Oracle, &p, d).unwrap();
        for e in [Engine::ClosedPrinted, Engine::ClosedCorrected] {
            assert!(rel(cavity_amplitude(e, &p, d).unwrap(), o) <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(128) })]

    #[test]
    fn corrected_cascade_equals_oracle_for_random_couplings(
        gc_mag in 0.0f64..10e6,
        gc_phase in -3.2f64..3.2,
        gn_mag in 0.0f64..10e6,
        gn_phase in -3.2f64..3.2,
        g_atom in 0.0f64..12e6,
        frac in 0.3f64..1.7,
    ) {
        let mut p = SystemParams::reference_preset();
        p.g_opto = Complex::from_polar(hz(gc_mag), gc_phase);
        p.g_magno = Complex::from_polar(hz(gn_mag), gn_phase);
        p.g_atom = hz(g_atom);
        let v = p.validate().unwrap();
        let d = frac * p.omega_b;
        let o = cavity_amplitude(Engine::Oracle, &v, d).unwrap();
        let c = cavity_amplitude(Engine::ClosedCorrected, &v, d).unwrap();
        prop_assert!(rel(c, o) <= 1e-10, "{}", rel(c, o));
    }
}
