use clap::Parser;
use witnesskit_cli::args::grid;
use witnesskit_cli::{projection_config, solver_config, AlphaSpec, Cli, Command};

fn common_of(args: &[&str]) -> witnesskit_cli::CommonArgs {
    match Cli::try_parse_from(args).unwrap().command {
        Command::Bnt { common, .. } => common,
        _ => unreachable!(),
    }
}

#[test]
fn grid_includes_end_within_half_step() {
    let g = grid(0.4, 1.0, 0.1).unwrap();
    assert_eq!(g.len(), 7);
    assert_eq!(*g.last().unwrap(), 1.0);
    // the last point lands on `end` and is never past it
    assert_eq!(grid(0.0, 1.0, 0.3).unwrap(), vec![0.0, 0.3, 0.6, 1.0]);
    assert_eq!(grid(0.0, 1.0, 0.4).unwrap(), vec![0.0, 0.4, 0.8, 1.0]);
    assert_eq!(grid(0.0, 1.0, 0.6).unwrap(), vec![0.0, 0.6, 1.0]);
    assert_eq!(grid(0.0, 1.0, 0.7).unwrap(), vec![0.0, 1.0]);
    assert_eq!(grid(0.5, 0.5, 0.1).unwrap(), vec![0.5]);
}

#[test]
fn grid_rejects_bad_input() {
    assert!(grid(0.0, 1.0, 0.0).is_err());
    assert!(grid(0.0, 1.0, -0.1).is_err());
    assert!(grid(1.0, 0.0, 0.1).is_err());
    assert!("a:b:c".parse::<AlphaSpec>().is_err());
    assert!("0.1:0.2".parse::<AlphaSpec>().is_err());
    assert!("nan".parse::<AlphaSpec>().is_err());
    assert_eq!("0.7".parse::<AlphaSpec>().unwrap(), AlphaSpec(vec![0.7]));
}

#[test]
fn flags_override_defaults() {
    let c = common_of(&[
        "witnesskit",
        "bnt",
        "--d",
        "2",
        "--alpha",
        "1",
        "--n-starts",
        "5",
        "--max-iters",
        "9",
        "--max-outer-iters",
        "11",
        "--tol-gap",
        "1e-6",
        "--seed",
        "42",
    ]);
    let p = projection_config(&c).unwrap();
    assert_eq!(p.solver.n_starts, 5);
    assert_eq!(p.solver.max_iters, 9);
    assert_eq!(p.solver.seed, 42);
    assert_eq!(p.max_outer_iters, 11);
    assert_eq!(p.tol_gap, 1e-6);
}

#[test]
fn invalid_overrides_are_rejected() {
    let c = common_of(&[
        "witnesskit",
        "bnt",
        "--d",
        "2",
        "--alpha",
        "1",
        "--n-starts",
        "0",
    ]);
    assert!(solver_config(&c).is_err());
    let c = common_of(&[
        "witnesskit",
        "bnt",
        "--d",
        "2",
        "--alpha",
        "1",
        "--tol-gap",
        "-1",
    ]);
    assert!(projection_config(&c).is_err());
}
