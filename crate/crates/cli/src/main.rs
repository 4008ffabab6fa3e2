//! Batch front-end: build named fixtures, run the solvers and diagnostics,
//! and emit JSON reports plus CSV series for external plotting.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{CommandFactory, Parser, Subcommand};
use serde_json::json;

use teichkit::beltrami::{holder_weighted_norm, p_norm, sup_norm};
use teichkit::bers::{a_p_norm, b_norm, b0_alpha_norm, bers_projection, decay_exponent};
use teichkit::config::Config;
use teichkit::dynamics::{conjugate_circle, sternberg_linearize, Germ1D};
use teichkit::error::Error;
use teichkit::extensions::{ahlfors_weill, classify_regularity};
use teichkit::fixtures::{
    beltrami_fixture, circle_fixture, form_fixture, germ_fixture, mobius_fixture,
};
use teichkit::foliation::{coset_residual, mori_profile, Subspace, Verdict};
use teichkit::grid::GridSpec;
use teichkit::solver::{maximal_dilatation, solve_bers, solve_disk};
use teichkit::suite::{format_table, run_all};

#[derive(Parser)]
#[command(name = "teichkit", version, about = "Quasiconformal toolkit for the unit disk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Angular resolution for the default grid layout, or a path to a
    /// GridSpec JSON file.
    #[arg(long, global = true, default_value = "256")]
    grid: String,
    /// Path to a Config JSON file with all tolerances and thresholds.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override of the solver residual acceptance tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Directory for artifacts; stable filenames per subcommand.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the report JSON to stdout (default behavior).
    #[arg(long, global = true)]
    json: bool,
    /// Also write CSV artifacts where the subcommand produces grid data.
    #[arg(long, global = true)]
    csv: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Beltrami equation for a coefficient fixture.
    Solve {
        #[arg(long)]
        fixture: String,
        /// "bers" (conformal outside) or "disk" (normalized self-map).
        #[arg(long, default_value = "bers")]
        kind: String,
    },
    /// Project a coefficient fixture to its quadratic form with norms.
    Embed {
        #[arg(long)]
        fixture: String,
    },
    /// Norms of a coefficient fixture (or of a form fixture via --form).
    Norm {
        #[arg(long)]
        fixture: Option<String>,
        #[arg(long)]
        form: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Coset diagnostic: does translating the fixture by the base point move
    /// its form by an element of the matching subspace?
    Coset {
        #[arg(long)]
        fixture: String,
        #[arg(long)]
        base: String,
        /// B0 | Ap:<p> | B0alpha:<a> | B0posalpha:<a>
        #[arg(long)]
        space: String,
    },
    /// Boundary distortion profile of the solved self-map.
    Mori {
        #[arg(long)]
        fixture: String,
    },
    /// Barycentric extension and regularity report of a circle-map fixture.
    Extend {
        #[arg(long)]
        fixture: String,
    },
    /// Section round trip for a form fixture.
    Aw {
        #[arg(long)]
        fixture: String,
    },
    /// Linearize a germ fixture (or a germ CSV file).
    Linearize {
        #[arg(long)]
        fixture: Option<String>,
        #[arg(long)]
        germ_csv: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
    },
    /// Conjugate a circle-map fixture by a Mobius fixture and classify the
    /// result.
    Conjugate {
        #[arg(long)]
        fixture: String,
        #[arg(long)]
        element: String,
    },
    /// Run the acceptance fixtures and print one line per criterion.
    Suite,
}

fn load_grid(arg: &str) -> Result<Arc<GridSpec>, Error> {
    if let Ok(n) = arg.parse::<usize>() {
        return Ok(GridSpec::with_n_theta(n));
    }
    let text = std::fs::read_to_string(arg)?;
    Ok(Arc::new(GridSpec::from_json(&text)?))
}

fn write_artifact(out: &Option<PathBuf>, name: &str, contents: &str) -> Result<(), Error> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(Path::new(dir).join(name), contents)?;
    }
    Ok(())
}

fn parse_space(s: &str) -> Result<Subspace, Error> {
    let lower = s.to_ascii_lowercase();
    let mut it = lower.split(':');
    let head = it.next().unwrap_or("");
    let num = it.next().map(|v| v.parse::<f64>());
    match (head, num) {
        ("b0", None) => Ok(Subspace::B0),
        ("ap", Some(Ok(p))) => Ok(Subspace::Ap(p)),
        ("a2", None) => Ok(Subspace::Ap(2.0)),
        ("a4", None) => Ok(Subspace::Ap(4.0)),
        ("b0alpha", Some(Ok(a))) => Ok(Subspace::B0Alpha(a)),
        ("b0posalpha", Some(Ok(a))) => Ok(Subspace::B0PosAlpha(a)),
        _ => Err(Error::Argument(format!("unknown subspace '{s}'"))),
    }
}

/// 0 on success, 2 on verdict failure, 3 on numerical error.
fn run(cli: Cli) -> Result<u8, Error> {
    let spec = load_grid(&cli.grid)?;
    let mut cfg = match &cli.config {
        Some(path) => Config::from_json(&std::fs::read_to_string(path)?)?,
        None => Config::default(),
    };
    if let Some(t) = cli.tol {
        cfg.dbar_tol = t;
    }
    let grid_hash = spec.hash_hex();

    match &cli.command {
        Command::Solve { fixture, kind } => {
            let mu = beltrami_fixture(spec.clone(), fixture)?;
            let solved = match kind.as_str() {
                "bers" => solve_bers(&mu, &cfg)?,
                "disk" => solve_disk(&mu, &cfg)?,
                other => return Err(Error::Argument(format!("unknown kind '{other}'"))),
            };
            let report = json!({
                "command": "solve",
                "fixture": fixture,
                "kind": kind,
                "grid_hash": grid_hash,
                "sup_norm": sup_norm(&mu),
                "dbar_residual": solved.dbar_residual,
                "neumann_terms": solved.neumann_terms,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            write_artifact(&cli.out, "solved_meta.json", &solved.metadata_json())?;
            if cli.csv || cli.out.is_some() {
                write_artifact(&cli.out, "solved_disk.csv", &solved.disk_grid_function().to_csv())?;
                write_artifact(
                    &cli.out,
                    "solved_exterior.csv",
                    &solved.exterior_grid_function().to_csv(),
                )?;
            }
            Ok(0)
        }
        Command::Embed { fixture } => {
            let mu = beltrami_fixture(spec.clone(), fixture)?;
            let phi = bers_projection(&mu, &cfg)?;
            let est = decay_exponent(&phi).ok();
            let report = json!({
                "command": "embed",
                "fixture": fixture,
                "grid_hash": grid_hash,
                "b_norm": b_norm(&phi),
                "decay_profile": phi.decay_profile(),
                "alpha_hat": est.as_ref().map(|e| e.alpha_hat),
                "alpha_fit_r2": est.as_ref().map(|e| e.r_squared),
                "holomorphy_residual": phi.holo_residual,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            write_artifact(&cli.out, "form_meta.json", &serde_json::to_string_pretty(&report)?)?;
            if cli.csv || cli.out.is_some() {
                write_artifact(&cli.out, "form.csv", &phi.to_csv())?;
            }
            Ok(0)
        }
        Command::Norm { fixture, form, p, alpha } => {
            let report = if let Some(name) = form {
                let phi = form_fixture(spec.clone(), name)?;
                json!({
                    "command": "norm",
                    "form": name,
                    "grid_hash": grid_hash,
                    "b_norm": b_norm(&phi),
                    "a_p_norm": p.map(|p| a_p_norm(&phi, p)).transpose()?,
                    "b0_alpha_norm": alpha.map(|a| b0_alpha_norm(&phi, a)).transpose()?,
                })
            } else if let Some(name) = fixture {
                let mu = beltrami_fixture(spec.clone(), name)?;
                json!({
                    "command": "norm",
                    "fixture": name,
                    "grid_hash": grid_hash,
                    "sup_norm": sup_norm(&mu),
                    "maximal_dilatation": maximal_dilatation(&mu),
                    "p_norm": p.map(|p| p_norm(&mu, p)).transpose()?,
                    "holder_weighted_norm": alpha.map(|a| holder_weighted_norm(&mu, a)).transpose()?,
                    "vanishing": mu.is_vanishing(cfg.vanishing_eps),
                })
            } else {
                return Err(Error::Argument("norm needs --fixture or --form".into()));
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
            write_artifact(&cli.out, "norm.json", &serde_json::to_string_pretty(&report)?)?;
            Ok(0)
        }
        Command::Coset { fixture, base, space } => {
            let mu = beltrami_fixture(spec.clone(), fixture)?;
            let nu = beltrami_fixture(spec.clone(), base)?;
            let sp = parse_space(space)?;
            let rep = coset_residual(&mu, &nu, sp, &cfg)?;
            let report = json!({
                "command": "coset",
                "fixture": fixture,
                "base": base,
                "report": rep,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            write_artifact(&cli.out, "coset.json", &serde_json::to_string_pretty(&report)?)?;
            Ok(if matches!(rep.verdict, Verdict::Pass) { 0 } else { 2 })
        }
        Command::Mori { fixture } => {
            let nu = beltrami_fixture(spec.clone(), fixture)?;
            let f = solve_disk(&nu, &cfg)?;
            let rep = mori_profile(&f)?;
            let big_k = maximal_dilatation(&nu);
            let ok = rep.lower >= 1.0 / big_k - cfg.mori_slack && rep.upper <= big_k + cfg.mori_slack;
            let report = json!({
                "command": "mori",
                "fixture": fixture,
                "maximal_dilatation": big_k,
                "report": rep,
                "within_bounds": ok,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            write_artifact(&cli.out, "mori.json", &serde_json::to_string_pretty(&report)?)?;
            Ok(if ok { 0 } else { 2 })
        }
        Command::Extend { fixture } => {
            let g = circle_fixture(1024, fixture)?;
            let rep = classify_regularity(&g, spec.clone(), &cfg)?;
            let report = json!({
                "command": "extend",
                "fixture": fixture,
                "report": rep,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            write_artifact(&cli.out, "extend.json", &serde_json::to_string_pretty(&report)?)?;
            Ok(0)
        }
        Command::Aw { fixture } => {
            let phi = form_fixture(spec.clone(), fixture)?;
            let mu = ahlfors_weill(&phi, &cfg)?;
            let back = bers_projection(&mu, &cfg)?;
            let err = b_norm(&back.sub(&phi)?);
            let ok = err < 5e-3;
            let report = json!({
                "command": "aw",
                "fixture": fixture,
                "grid_hash": grid_hash,
                "b_norm_in": b_norm(&phi),
                "section_sup_norm": sup_norm(&mu),
                "round_trip_error": err,
                "within_tolerance": ok,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            write_artifact(&cli.out, "aw.json", &serde_json::to_string_pretty(&report)?)?;
            Ok(if ok { 0 } else { 2 })
        }
        Command::Linearize { fixture, germ_csv, alpha } => {
            let germ = match (fixture, germ_csv) {
                (Some(name), None) => germ_fixture(name)?,
                (None, Some(path)) => {
                    Germ1D::from_csv(&std::fs::read_to_string(path)?, *alpha)?
                }
                _ => return Err(Error::Argument("linearize needs --fixture or --germ-csv".into())),
            };
            let (_, rep) = sternberg_linearize(&germ, cfg.sternberg_tol, &cfg)?;
            let report = json!({
                "command": "linearize",
                "fixture": fixture,
                "report": rep,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            write_artifact(&cli.out, "linearize.json", &serde_json::to_string_pretty(&report)?)?;
            Ok(0)
        }
        Command::Conjugate { fixture, element } => {
            let f = circle_fixture(1024, fixture)?;
            let gamma = mobius_fixture(element)?;
            let conj = conjugate_circle(&f, &gamma)?;
            let rep = classify_regularity(&conj, spec.clone(), &cfg)?;
            let report = json!({
                "command": "conjugate",
                "fixture": fixture,
                "element": element,
                "report": rep,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            write_artifact(&cli.out, "conjugate.json", &serde_json::to_string_pretty(&report)?)?;
            if cli.csv || cli.out.is_some() {
                let mut csv = String::from("theta,lift\n");
                for (k, l) in conj.lift_samples().iter().enumerate() {
                    let t = std::f64::consts::TAU * k as f64 / conj.len() as f64;
                    csv.push_str(&format!("{t:.17e},{l:.17e}\n"));
                }
                write_artifact(&cli.out, "conjugated_map.csv", &csv)?;
            }
            Ok(0)
        }
        Command::Suite => {
            let outcomes = run_all(&cfg);
            print!("{}", format_table(&outcomes));
            write_artifact(&cli.out, "suite.json", &serde_json::to_string_pretty(&outcomes)?)?;
            Ok(if outcomes.iter().all(|o| o.passed) { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version requests are not usage errors
            if e.kind() == clap::error::ErrorKind::DisplayHelp
                || e.kind() == clap::error::ErrorKind::DisplayVersion
            {
                let _ = e.print();
                return ExitCode::from(0);
            }
            let _ = e.print();
            let _ = Cli::command();
            return ExitCode::from(64);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
