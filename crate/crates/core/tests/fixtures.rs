use std::fs;
use std::path::PathBuf;

use qprobe::fixtures::{two_level_file, water_analog_file};
use qprobe::io::load_model;
use qprobe::{preset_coupling, CouplingPreset, PauliSum};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn read(name: &str) -> String {
    fs::read_to_string(dir().join(name)).unwrap()
}

#[test]
fn shipped_files_match_builders() {
    assert_eq!(
        read("two_level.json"),
        two_level_file(0.005, 300.0).unwrap().to_json_string() + "\n"
    );
    let water = water_analog_file(CouplingPreset::SingleFlips, 0.005, 500.0, "00010");
    assert_eq!(read("water_analog.json"), water.to_json_string() + "\n");
}

#[test]
fn shipped_couplings_match_presets() {
    for preset in [
        CouplingPreset::SingleFlips,
        CouplingPreset::PairFlips,
        CouplingPreset::Collective,
    ] {
        let file = PauliSum::from_json_str(&read(&format!("coupling_{preset}.json"))).unwrap();
        let built = preset_coupling(preset, 5).unwrap();
        assert_eq!(&file, built.op(), "{preset}");
    }
}

#[test]
fn every_model_fixture_loads() {
    for name in ["two_level.json", "water_analog.json"] {
        let m = load_model(&dir().join(name)).unwrap();
        m.validate().unwrap();
    }
    let water = load_model(&dir().join("water_analog.json")).unwrap();
    assert_eq!(water.width(), 5);
    assert_eq!(water.system.physical_dim(), 18);
    assert_eq!(water.initial.amplitudes()[2].re, 1.0);
}
