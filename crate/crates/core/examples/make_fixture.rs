//! Regenerates the bundled synthetic panel and its pipeline config.
//!
//! cargo run -p panelkit --example make_fixture -- <output dir>

use std::fs::File;
use std::path::PathBuf;

use panelkit::fixture::{default_panel, fixture_config};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;

    let panel = default_panel()?;
    panel.write_csv(File::create(dir.join("synthetic_panel.csv"))?)?;

    let mut config = fixture_config();
    config.input = Some("synthetic_panel.csv".into());
    std::fs::write(dir.join("pipeline.toml"), toml::to_string(&config)?)?;
    println!("wrote {}", dir.display());
    Ok(())
}
