//! Schema contract: lossless round-trips, unknown-key rejection at
//! every nesting level, and the operating-point rules.

use fadecap_cli::config::{self, RunConfig};
use fadecap_cli::error::CliError;

const REFERENCE: &str = r#"
schema = 1

[channel]
head = [1.0, 0.4]
tail = { kind = "geometric", ratio = 0.5 }
taps = { kind = "per-path", list = [0.5, [0.3, 0.1]], default = 0.0 }
noise_var = 1.0

[experiment]
blocklength = 6
input = { kind = "on-off", p_on = 0.5 }
samples = 1000
seed = 42
snr_db = [0.0, 10.0]

[bound]
delta_grid = [0.2, 0.5]
eta_grid = [0.5]
horizon = 300
epsilon = { kind = "log-tail" }

[output]
directory = "out"
formats = ["csv", "svg"]
"#;

#[test]
fn round_trip_is_lossless() {
    let parsed: RunConfig = toml::from_str(REFERENCE).unwrap();
    let rendered = toml::to_string(&parsed).unwrap();
    let reparsed: RunConfig = toml::from_str(&rendered).unwrap();
    assert_eq!(parsed, reparsed);
}

#[test]
fn unknown_keys_are_rejected_at_every_level() {
    let poisoned = [
        // root
        REFERENCE.replace("schema = 1", "schema = 1\nextra = 1"),
        // section
        REFERENCE.replace("noise_var = 1.0", "noise_var = 1.0\nextra = 1"),
        // tagged tail variant
        REFERENCE.replace(
            r#"tail = { kind = "geometric", ratio = 0.5 }"#,
            r#"tail = { kind = "geometric", ratio = 0.5, extra = 1 }"#,
        ),
        // tagged input variant
        REFERENCE.replace(
            r#"input = { kind = "on-off", p_on = 0.5 }"#,
            r#"input = { kind = "on-off", p_on = 0.5, extra = 1 }"#,
        ),
        // parameterless variant
        REFERENCE.replace(
            r#"epsilon = { kind = "log-tail" }"#,
            r#"epsilon = { kind = "log-tail", extra = 1 }"#,
        ),
    ];
    for text in &poisoned {
        let err = toml::from_str::<RunConfig>(text).unwrap_err();
        assert!(
            err.to_string().contains("extra"),
            "error should name the offending key: {err}"
        );
    }
}

#[test]
fn wrong_variant_fields_are_rejected() {
    let text = REFERENCE.replace(
        r#"tail = { kind = "geometric", ratio = 0.5 }"#,
        r#"tail = { kind = "zero", ratio = 0.5 }"#,
    );
    assert!(toml::from_str::<RunConfig>(&text).is_err());
}

#[test]
fn schema_version_is_enforced() {
    let parsed: RunConfig = toml::from_str(&REFERENCE.replace("schema = 1", "schema = 3")).unwrap();
    let err = parsed.validate().unwrap_err();
    assert!(err.to_string().contains("schema"), "{err}");
}

#[test]
fn power_and_snr_are_mutually_exclusive_and_required() {
    let both = REFERENCE.replace("snr_db = [0.0, 10.0]", "snr_db = [0.0]\npower = 1.0");
    let err = toml::from_str::<RunConfig>(&both)
        .unwrap()
        .validate()
        .unwrap_err();
    assert!(err.to_string().contains("mutually exclusive"), "{err}");

    let neither = REFERENCE.replace("snr_db = [0.0, 10.0]", "");
    let err = toml::from_str::<RunConfig>(&neither)
        .unwrap()
        .validate()
        .unwrap_err();
    assert!(err.to_string().contains("power or snr_db"), "{err}");
}

#[test]
fn single_point_rules() {
    let config: RunConfig = toml::from_str(REFERENCE).unwrap();
    // Two snr entries name two points, not one.
    assert!(matches!(
        config.single_power(),
        Err(CliError::Invalid(_))
    ));
    let one: RunConfig =
        toml::from_str(&REFERENCE.replace("snr_db = [0.0, 10.0]", "snr_db = [20.0]")).unwrap();
    let p = one.single_power().unwrap();
    assert!((p - 100.0).abs() < 1e-9);

    let with_power: RunConfig =
        toml::from_str(&REFERENCE.replace("snr_db = [0.0, 10.0]", "power = 7.5")).unwrap();
    assert_eq!(with_power.single_power().unwrap(), 7.5);
    // And the sweep axis demands an explicit list.
    assert!(with_power.sweep_db().is_err());
}

#[test]
fn complex_entries_accept_real_and_pair_forms() {
    let config: RunConfig = toml::from_str(REFERENCE).unwrap();
    let taps = config.taps();
    let first = taps.coefficient(0);
    let second = taps.coefficient(1);
    let beyond = taps.coefficient(7);
    assert_eq!((first.re, first.im), (0.5, 0.0));
    assert_eq!((second.re, second.im), (0.3, 0.1));
    assert_eq!((beyond.re, beyond.im), (0.0, 0.0));
}

#[test]
fn epsilon_table_files_load_and_miss_loudly() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("eps.csv"),
        "# delta, eta, epsilon\n0.5, 0.5, 0.1\n0.2, 0.6, 0.05\n",
    )
    .unwrap();
    let text = REFERENCE.replace(
        r#"epsilon = { kind = "log-tail" }"#,
        r#"epsilon = { kind = "table", path = "eps.csv" }"#,
    );
    let config: RunConfig = toml::from_str(&text).unwrap();
    let eps = config.epsilon(dir.path()).unwrap();
    assert!((eps.eval(0.5, 0.5).unwrap() - 0.1).abs() < 1e-15);
    assert!(eps.eval(0.3, 0.5).is_err());

    std::fs::write(dir.path().join("eps.csv"), "0.5, oops, 0.1\n").unwrap();
    let err = config.epsilon(dir.path()).unwrap_err();
    assert!(matches!(err, CliError::EpsilonTable { line: 1, .. }), "{err}");
}

#[test]
fn grids_and_defaults_resolve() {
    let config: RunConfig = toml::from_str(REFERENCE).unwrap();
    assert_eq!(config.delta_grid(), vec![0.2, 0.5]);
    assert_eq!(config.eta_grid(), vec![0.5]);
    assert_eq!(config.horizon(), 300);
    assert!(config.wants_svg());

    let bare: RunConfig = toml::from_str(
        &REFERENCE
            .replace("[bound]\n", "")
            .replace("delta_grid = [0.2, 0.5]\n", "")
            .replace("eta_grid = [0.5]\n", "")
            .replace("horizon = 300\n", "")
            .replace("epsilon = { kind = \"log-tail\" }\n", "")
            .replace("[output]\n", "")
            .replace("directory = \"out\"\n", "")
            .replace("formats = [\"csv\", \"svg\"]\n", ""),
    )
    .unwrap();
    assert_eq!(bare.delta_grid().len(), 20);
    assert_eq!(bare.eta_grid().len(), 19);
    assert_eq!(bare.horizon(), config::DEFAULT_HORIZON);
    assert!(!bare.wants_svg());
    assert_eq!(bare.out_dir(), std::path::PathBuf::from("."));
}
