//! Snapshot export for impulse-response inspection: one file per sample
//! time, a CSV grid of m_z per cell (row-major), optionally followed by
//! m_x and m_y grids.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::spin::film::FilmState;
use crate::Result;

/// Which components to export.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Components {
    Z,
    Xyz,
}

/// Render a snapshot: header line `# t=<seconds> nx=<Nx> ny=<Ny>` followed
/// by ny rows of nx comma-separated m_z values; with [`Components::Xyz`],
/// `# component=mx` and `# component=my` grids are appended.
pub fn render_snapshot(state: &FilmState, nx: usize, ny: usize, components: Components) -> String {
    assert_eq!(state.m.len(), nx * ny);
    let mut out = String::new();
    writeln!(out, "# t={} nx={} ny={}", state.time, nx, ny).unwrap();
    let grid = |out: &mut String, pick: &dyn Fn(usize) -> f64| {
        for iy in 0..ny {
            let row: Vec<String> = (0..nx)
                .map(|ix| format!("{}", pick(iy * nx + ix)))
                .collect();
            writeln!(out, "{}", row.join(",")).unwrap();
        }
    };
    grid(&mut out, &|i| state.m[i].z);
    if components == Components::Xyz {
        writeln!(out, "# component=mx").unwrap();
        grid(&mut out, &|i| state.m[i].x);
        writeln!(out, "# component=my").unwrap();
        grid(&mut out, &|i| state.m[i].y);
    }
    out
}

/// Write a snapshot atomically (write to a temp file, then rename).
pub fn write_snapshot(
    path: &Path,
    state: &FilmState,
    nx: usize,
    ny: usize,
    components: Components,
) -> Result<()> {
    let body = render_snapshot(state, nx, ny, components);
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(body.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
