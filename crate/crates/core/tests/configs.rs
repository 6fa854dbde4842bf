use std::path::{Path, PathBuf};

use noonsi::config::RunConfig;
use noonsi::interference::{envelope_fwhm, envelope_scan};
use noonsi::spectral::SellmeierTable;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> RunConfig {
    RunConfig::load(&configs_dir().join(name)).unwrap()
}

#[test]
fn shipped_configs_validate() {
    for name in ["default.toml", "phase_matched.toml", "sellmeier.toml"] {
        load(name)
            .validate()
            .unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn linearized_velocities_match_the_ktp_table() {
    let table = SellmeierTable::load(&configs_dir().join("ktp_sellmeier.toml")).unwrap();
    let cfg = load("phase_matched.toml");
    let v = table.inverse_group_velocities(&cfg.pump);
    let c = cfg.crystal.as_ref().unwrap();
    assert!(
        (v.pump - c.pump_inverse_group_velocity_ps_per_mm.unwrap()).abs() < 1e-4,
        "{v:?}"
    );
    assert!(
        (v.signal - c.signal_inverse_group_velocity_ps_per_mm.unwrap()).abs() < 1e-4,
        "{v:?}"
    );
    assert!(
        (v.idler - c.idler_inverse_group_velocity_ps_per_mm.unwrap()).abs() < 1e-4,
        "{v:?}"
    );
    // extended phase matching: the pump travels at the mean pair group velocity
    assert!((v.pump - 0.5 * (v.signal + v.idler)).abs() < 1e-3);
}

#[test]
fn phase_matched_sources_give_a_few_picosecond_envelope() {
    for name in ["phase_matched.toml", "sellmeier.toml"] {
        let jsa = load(name).build_jsa().unwrap();
        let fwhm = envelope_fwhm(&envelope_scan(&jsa, -8.0, 8.0, 0.02).unwrap()).unwrap();
        assert!(
            (3.0..5.5).contains(&fwhm),
            "{name}: envelope FWHM {fwhm} ps"
        );
    }
}
