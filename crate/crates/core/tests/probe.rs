use num_complex::Complex64;
use teichkit::beltrami::BeltramiField;
use teichkit::config::Config;
use teichkit::extensions::classify_regularity;
use teichkit::fixtures::random_smooth_field;
use teichkit::grid::GridSpec;
use teichkit::solver::{solve_bers, solve_disk};

#[test]
fn probe_generic_steep_and_alpha() {
    let cfg = Config::default();
    let spec = GridSpec::with_n_theta(128);
    let mu = random_smooth_field(spec.clone(), 3, 0.85).unwrap();
    match solve_bers(&mu, &cfg) {
        Ok(f) => println!("bers generic 0.85: terms {}, residual {:.2e}", f.neumann_terms, f.dbar_residual),
        Err(e) => println!("bers generic 0.85: ERROR {e}"),
    }
    let mu = random_smooth_field(spec.clone(), 3, 0.6).unwrap();
    match solve_disk(&mu, &cfg) {
        Ok(f) => println!("disk generic 0.6: terms {}, residual {:.2e}", f.neumann_terms, f.dbar_residual),
        Err(e) => println!("disk generic 0.6: ERROR {e}"),
    }
    // measured decay exponent for the analytic boundary diffeo
    let mu = BeltramiField::constant(spec.clone(), Complex64::new(0.1, 0.0)).unwrap();
    let f = solve_disk(&mu, &cfg).unwrap();
    let g = f.boundary_map().unwrap().clone();
    let rep = classify_regularity(&g, spec, &cfg).unwrap();
    println!("analytic diffeo alpha_hat: {:?}, field profile last {:?}", rep.alpha_hat, rep.vanishing_profile.last());
}
