//! Writes every shipped scenario plus its materialized members and true
//! profiles.

use profdec::harness::write_fixtures;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("profdec-fixtures"));
    write_fixtures(&out, None)?;
    let mut dirs: Vec<_> = std::fs::read_dir(out.join("fixtures"))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    dirs.sort();
    for dir in dirs {
        let members = std::fs::read_dir(dir.join("members")).map(|d| d.count()).unwrap_or(0);
        println!("{}: {members} members", dir.display());
    }
    Ok(())
}
