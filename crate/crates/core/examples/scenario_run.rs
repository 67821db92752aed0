//! Runs a shipped scenario through the M-term and extraction harness and
//! lists what was written.

use profdec::harness::{run_extract, run_mterm, shipped_scenarios, Knobs, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "three-profiles".into());
    let (_, text) = shipped_scenarios()
        .into_iter()
        .find(|(file, _)| file.trim_end_matches(".toml") == name)
        .ok_or_else(|| format!("no shipped scenario {name}"))?;
    let s = Scenario::parse(text)?;
    let out = std::env::temp_dir().join("profdec-example").join(&name);

    for (stage, outcome) in [
        ("mterm", run_mterm(&s, &out.join("mterm"), &Knobs::default())?),
        ("extract", run_extract(&s, &out.join("extract"), &Knobs::default())?),
    ] {
        for note in &outcome.notes {
            println!("{stage}: {note}");
        }
        for (check, ok) in &outcome.checks {
            println!("{stage}: {} {check}", if *ok { "PASS" } else { "FAIL" });
        }
    }
    println!("output in {}", out.display());
    Ok(())
}
