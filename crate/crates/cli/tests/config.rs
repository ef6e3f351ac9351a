use std::io::Write;

use sdns_cli::config::parse_override;
use sdns_cli::manifest::config_hash;
use sdns_cli::{parse_config, Form, RunConfig};
use sdns_core::{InitialCondition, Scheme};

fn file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn parse(text: &str, overrides: &[&str]) -> anyhow::Result<RunConfig> {
    let f = file(text);
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    parse_config(Some(f.path()), &o)
}

fn err(text: &str, overrides: &[&str]) -> String {
    format!("{:#}", parse(text, overrides).unwrap_err())
}

#[test]
fn minimal_file_gets_defaults() {
    let cfg = parse("[sim]\nnu = 0.02\n", &[]).unwrap();
    let d = RunConfig::default();
    assert_eq!(cfg.sim.nu, 0.02);
    assert_eq!(cfg.sim.n_modes, d.sim.n_modes);
    assert_eq!(cfg.noise, d.noise);
    assert_eq!(cfg.nu_list, d.nu_list);
    assert_eq!(parse("", &[]).unwrap(), d);
    assert_eq!(parse_config(None, &[]).unwrap(), d);
}

#[test]
fn every_key_is_read() {
    let cfg = parse(
        r#"
[sim]
nu = 0.01
alpha = 3
n_modes = 12
dt = 0.002
t_end = 0.5
hitting_M = 50
scheme = "ito-euler"
corrector = "full"
integrating_factor = true
nonlinear = false
form = "vorticity"

[sim.ic]
kind = "random"
seed = 5
h1_norm = 2.0
bandwidth = 4

[noise]
modes = 4
decay_rate = 2.0
amplitude = 0.5
seed = 99

[noise.bump]
radius = 0.8
r_max = 0.85
sharpness = 6.0

[grid]
n_r = 48
n_theta = 32

[sweep]
nu_list = [0.2, 0.1]

[ensemble]
paths = 7
"#,
        &[],
    )
    .unwrap();
    assert_eq!(cfg.sim.nu, 0.01);
    assert_eq!(cfg.sim.alpha, 3.0);
    assert_eq!(cfg.sim.n_modes, 12);
    assert_eq!(cfg.sim.hitting_m, 50.0);
    assert_eq!(cfg.sim.scheme, Scheme::ItoEuler);
    assert!(cfg.sim.integrating_factor && !cfg.sim.nonlinear);
    assert_eq!(cfg.form, Form::Vorticity);
    assert_eq!(
        cfg.sim.ic,
        InitialCondition::Random {
            seed: 5,
            h1_norm: 2.0,
            bandwidth: 4
        }
    );
    assert_eq!(cfg.sim.seed, 99);
    assert_eq!((cfg.noise.modes, cfg.noise.bump.sharpness), (4, 6.0));
    assert_eq!((cfg.n_r, cfg.n_theta), (48, 32));
    assert_eq!(cfg.nu_list, vec![0.2, 0.1]);
    assert_eq!(cfg.paths, 7);
}

#[test]
fn negative_viscosity_names_the_key() {
    let e = err("[sim]\nnu = -1\n", &[]);
    assert!(e.contains("sim.nu"), "{e}");
}

#[test]
fn override_wins_over_file() {
    let cfg = parse(
        "[sim]\nnu = 0.02\n",
        &["sim.nu=0.07", "sim.scheme=ito-euler"],
    )
    .unwrap();
    assert_eq!(cfg.sim.nu, 0.07);
    assert_eq!(cfg.sim.scheme, Scheme::ItoEuler);
    // later overrides win over earlier ones
    let cfg = parse("", &["sim.nu=0.07", "sim.nu=0.03"]).unwrap();
    assert_eq!(cfg.sim.nu, 0.03);
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(err("[sim]\nviscosity = 0.1\n", &[]).contains("sim.viscosity"));
    assert!(err("", &["noise.bump.width=1"]).contains("noise.bump.width"));
}

#[test]
fn type_mismatch_names_the_key() {
    let e = err("[sim]\nn_modes = \"many\"\n", &[]);
    assert!(e.contains("sim.n_modes"), "{e}");
    let e = err("[sweep]\nnu_list = [0.1, \"x\"]\n", &[]);
    assert!(e.contains("sweep.nu_list[1]"), "{e}");
}

#[test]
fn range_violations_name_their_keys() {
    for (over, key) in [
        ("sim.dt=0", "sim.dt"),
        ("sim.hitting_M=1", "sim.hitting_M"),
        ("sim.n_modes=0", "sim.n_modes"),
        ("sim.t_end=1e-5", "sim.t_end"),
        ("grid.n_theta=33", "grid.n_theta"),
        ("noise.bump.r_max=1.0", "noise.bump.r_max"),
        ("sweep.nu_list=[0.1, 0.2]", "sweep.nu_list[1]"),
        ("sweep.nu_list=[]", "sweep.nu_list"),
        ("ensemble.paths=0", "ensemble.paths"),
        ("sim.ic.index=40", "sim.ic.index"),
        ("sim.scheme=rk4", "sim.scheme"),
    ] {
        let e = err("", &[over]);
        assert!(e.contains(key), "{over}: {e}");
    }
}

#[test]
fn stray_initial_condition_keys_are_rejected() {
    let e = err("[sim.ic]\nkind = \"mode\"\nh1_norm = 2.0\n", &[]);
    assert!(e.contains("sim.ic.h1_norm"), "{e}");
    let cfg = parse("", &["sim.ic.kind=zero"]).unwrap();
    assert_eq!(cfg.sim.ic, InitialCondition::Zero);
}

#[test]
fn missing_file_is_an_error() {
    let e = parse_config(Some(std::path::Path::new("/nonexistent/sdns.toml")), &[]).unwrap_err();
    assert!(format!("{e:#}").contains("/nonexistent/sdns.toml"));
}

#[test]
fn overrides_read_toml_literals() {
    let (k, v) = parse_override("sweep.nu_list = [0.1, 0.05]").unwrap();
    assert_eq!(k, "sweep.nu_list");
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(
        parse_override("sim.scheme=strat-heun").unwrap().1.as_str(),
        Some("strat-heun")
    );
    assert!(parse_override("sim.nu").is_err());
    assert!(parse_override("=3").is_err());
    // seeds beyond the TOML integer range go in as strings
    let cfg = parse("", &["noise.seed=\"18446744073709551615\""]).unwrap();
    assert_eq!(cfg.sim.seed, u64::MAX);
}

#[test]
fn canonical_hash_ignores_layout_but_not_values() {
    let a = parse("[sim]\nnu = 0.02\ndt = 0.001\n", &[]).unwrap();
    let b = parse("[sim]\ndt = 1e-3\n\n\nnu = 0.020\n", &[]).unwrap();
    let c = parse("[sim]\nnu = 0.021\n", &[]).unwrap();
    assert_eq!(config_hash(&a.canonical()), config_hash(&b.canonical()));
    assert_ne!(config_hash(&a.canonical()), config_hash(&c.canonical()));
    // the canonical text parses back to the same configuration
    assert_eq!(parse(&a.canonical(), &[]).unwrap(), a);
    let r = parse("", &["sim.ic.kind=random", "sim.ic.seed=3"]).unwrap();
    assert_eq!(parse(&r.canonical(), &[]).unwrap(), r);
}

#[test]
fn hash_is_sha256() {
    assert_eq!(
        config_hash("abc"),
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    );
}
