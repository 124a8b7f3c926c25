use std::f64::consts::{LN_2, PI};

use monbcs::gge::{
    entropy_density, entropy_density_discrete, gge_entropy_curve, gge_table, max_group_velocity, nn_pairing_neel,
    nn_pairing_neel_discrete, nn_pairing_vacuum, saturation_time, spectrum_at, SizeConvention,
};
use monbcs::quadrature::{adaptive, trapezoid, FALLBACK_POINTS};
use monbcs::ModelParams;

fn params(j: f64, delta: f64) -> ModelParams {
    ModelParams::new(2, j, delta, 0.0).unwrap()
}

fn f_bin(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.ln() - (1.0 - x) * (1.0 - x).ln()
    }
}

/// The entropy integrand written out from scratch.
fn density_integrand(j: f64, d: f64) -> impl Fn(f64) -> f64 {
    move |k: f64| {
        let xi = -2.0 * j * k.cos();
        let e = (xi * xi + d * d).sqrt();
        2.0 * f_bin(0.5 + d / (2.0 * e)) / (2.0 * PI)
    }
}

#[test]
fn entropy_density_by_two_quadratures() {
    let c = entropy_density(&params(1.0, 2.0)).unwrap();
    let trap = trapezoid(density_integrand(1.0, 2.0), -PI, PI, FALLBACK_POINTS);
    assert!((c - trap).abs() < 1e-8, "{c} vs {trap}");
    let fine = adaptive(density_integrand(1.0, 2.0), -PI, PI, 5e-11).unwrap().value;
    let finer = adaptive(density_integrand(1.0, 2.0), -PI, PI, 2.5e-11).unwrap().value;
    assert!((fine - finer).abs() < 1e-10);
    assert!((c - finer).abs() < 1e-10);
}

#[test]
fn entropy_density_decreases_with_pairing() {
    let grid: Vec<f64> = (0..20).map(|i| 0.25 * i as f64).collect();
    let c: Vec<f64> = grid.iter().map(|d| entropy_density(&params(1.0, *d)).unwrap()).collect();
    assert!((c[0] - 2.0 * LN_2).abs() < 1e-14);
    assert!(c.windows(2).all(|w| w[1] < w[0]), "{c:?}");
    assert!(entropy_density(&params(1.0, 1e4)).unwrap() < 1e-6);
    // the table is the same function
    let rows = gge_table(1.0, &grid).unwrap();
    assert!(rows.iter().zip(&c).all(|(r, c)| r.c_delta == *c));
}

#[test]
fn discrete_sums_approach_the_integrals() {
    let p = params(1.0, 1.0);
    let c = entropy_density(&p).unwrap();
    let err = |l| (entropy_density_discrete(&p, l).unwrap() - c).abs();
    // F(λ) has a (1−λ)ln(1−λ) kink at k = π/2, so the sum converges
    // algebraically rather than exponentially
    assert!(err(512) < 1e-6, "{}", err(512));
    assert!(err(2048) < err(512) / 8.0);
    let nn = nn_pairing_neel(&p, 1).unwrap();
    assert!((nn_pairing_neel_discrete(&p, 256, 1).unwrap() - nn).abs() < 1e-10);
}

#[test]
fn saturation_time_limits_and_order() {
    let tl = saturation_time(&params(1.0, 0.0), 1).unwrap();
    assert!((tl - 0.25).abs() < 1e-10);
    let big = saturation_time(&params(1.0, 50.0), 1).unwrap();
    assert!((big / 12.5 - 1.0).abs() < 0.01, "{big}");
    let taus: Vec<f64> = [0.0, 0.5, 1.0, 2.0, 4.0].iter().map(|d| saturation_time(&params(1.0, *d), 32).unwrap()).collect();
    assert!(taus.windows(2).all(|w| w[1] > w[0]), "{taus:?}");
    assert!(max_group_velocity(&params(0.0, 1.0)).is_err());
}

#[test]
fn group_velocity_is_the_slope_of_the_band() {
    let p = params(1.0, 1.3);
    let h = 1e-6;
    for i in 0..40 {
        let k = -PI + 0.157 * i as f64;
        let fd = (spectrum_at(k + h, &p).e - spectrum_at(k - h, &p).e) / (2.0 * h);
        assert!((spectrum_at(k, &p).vg - fd).abs() < 1e-7);
    }
    // the maximum found by the search beats a dense scan
    let (v, _) = max_group_velocity(&p).unwrap();
    let scan = (0..20_000).map(|i| spectrum_at(PI * i as f64 / 20_000.0, &p).vg.abs()).fold(0.0, f64::max);
    assert!(v >= scan - 1e-12 && v - scan < 1e-6);
}

#[test]
fn band_is_symmetric_under_k_to_minus_k_and_k_plus_pi() {
    let p = params(1.0, 0.8);
    for i in 0..50 {
        let k = 0.1234 * i as f64;
        let a = spectrum_at(k, &p);
        assert!((spectrum_at(-k, &p).e - a.e).abs() < 1e-13);
        assert!((spectrum_at(k + PI, &p).e - a.e).abs() < 1e-13);
        assert!((spectrum_at(k + PI, &p).xi + a.xi).abs() < 1e-13);
    }
}

#[test]
fn no_net_quasiparticle_current() {
    // v_g is odd in k while the occupation is even
    let p = params(1.0, 1.5);
    let flux = adaptive(|k| spectrum_at(k, &p).vg * f_bin(spectrum_at(k, &p).lambda_plus), -PI, PI, 1e-13).unwrap();
    assert!(flux.value.abs() < 1e-12);
}

#[test]
fn pairing_closed_form_and_stagger() {
    let p = params(1.0, 1.0);
    let target = (1.0 - 1.0 / 5f64.sqrt()) / 4.0;
    // ∫ cos²k / (4cos²k + 1) dk / 2π via the residue result ∫ dk/(3 + 2cos 2k) = 2π/√5
    let direct = adaptive(|k| k.cos().powi(2) / (4.0 * k.cos().powi(2) + 1.0), -PI, PI, 1e-13).unwrap().value / (2.0 * PI);
    assert!((direct - target).abs() < 1e-12);
    assert!((nn_pairing_neel(&p, 1).unwrap() - target).abs() < 1e-10);
    assert!((nn_pairing_neel(&p, 2).unwrap() + target).abs() < 1e-10);
    assert_eq!(nn_pairing_neel(&params(1.0, 0.0), 1).unwrap(), 0.0);
    assert_eq!(nn_pairing_neel(&params(0.0, 1.0), 1).unwrap(), 0.0);
}

#[test]
fn vacuum_and_neel_pairing_share_magnitude() {
    for d in [0.5, 1.0, 2.0] {
        let p = params(1.0, d);
        let v = nn_pairing_vacuum(&p).unwrap();
        for j in 1..5 {
            assert!((nn_pairing_neel(&p, j).unwrap().abs() - v.abs()).abs() < 1e-12);
        }
    }
    assert_eq!(nn_pairing_vacuum(&params(1.0, 0.0)).unwrap(), 0.0);
}

#[test]
fn plateau_is_linear_in_length() {
    let p = params(1.0, 1.0);
    let conv = SizeConvention { factor: 0.3 };
    let a = gge_entropy_curve(&p, 100, conv).unwrap();
    let b = gge_entropy_curve(&p, 500, conv).unwrap();
    assert!((b.s_plateau - 5.0 * a.s_plateau).abs() < 1e-12);
    assert!((b.tau - 5.0 * a.tau).abs() < 1e-9);
    let zero = gge_entropy_curve(&params(1.0, 0.0), 10, SizeConvention::CHAIN_LENGTH).unwrap();
    assert!((zero.s_plateau - 20.0 * LN_2).abs() < 1e-12);
}

#[test]
fn table_rejects_bad_grids() {
    assert!(gge_table(1.0, &[]).is_err());
    assert!(gge_table(1.0, &[1.0, -0.5]).is_err());
    assert!(gge_table(1.0, &[f64::NAN]).is_err());
}
