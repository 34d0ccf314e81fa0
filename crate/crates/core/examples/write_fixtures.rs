//! Regenerates the JSON files under `crates/core/fixtures/`.

use std::fs;
use std::path::Path;

use qprobe::fixtures::{two_level_file, water_analog_file};
use qprobe::{preset_coupling, CouplingPreset};

fn main() -> qprobe::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    fs::create_dir_all(&dir)?;
    fs::write(
        dir.join("two_level.json"),
        two_level_file(0.005, 300.0)?.to_json_string() + "\n",
    )?;
    let water = water_analog_file(CouplingPreset::SingleFlips, 0.005, 500.0, "00010");
    fs::write(dir.join("water_analog.json"), water.to_json_string() + "\n")?;
    for preset in [
        CouplingPreset::SingleFlips,
        CouplingPreset::PairFlips,
        CouplingPreset::Collective,
    ] {
        let a = preset_coupling(preset, 5)?;
        fs::write(
            dir.join(format!("coupling_{preset}.json")),
            a.op().to_json_string() + "\n",
        )?;
    }
    println!("fixtures written to {}", dir.display());
    Ok(())
}
