use std::path::Path;

use mpf::scenario::Simulation;

use crate::Failure;

pub fn parse_axis(s: &str) -> Result<usize, String> {
    match s {
        "x" | "0" => Ok(0),
        "y" | "1" => Ok(1),
        "z" | "2" => Ok(2),
        _ => Err(format!("axis must be one of x, y, z (or 0, 1, 2), got {s:?}")),
    }
}

pub fn run(scenario: &Path, axis: usize, index: usize, out: &Path) -> Result<(), Failure> {
    let sim = Simulation::load(scenario)?;
    let sdf = &sim.world.sdf;
    let shape = sdf.shape();
    let rows = sdf.slice(axis, index).ok_or_else(|| {
        Failure::Input(format!(
            "--index {index} out of range for axis {axis} (grid has {} voxels along it)",
            shape[axis]
        ))
    })?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(out)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", out.display())))?;
    for row in &rows {
        writer
            .write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", out.display())))?;
    }
    writer.flush().map_err(|e| Failure::Io(format!("cannot write {}: {e}", out.display())))?;
    eprintln!("wrote {} x {} slice to {}", rows.len(), rows.first().map_or(0, Vec::len), out.display());
    Ok(())
}
