//! Wavefront OBJ snapshots. Per-vertex fields ride along as comment blocks
//!
//! ```text
//! # field phi
//! # 1.2500000000000000e-1
//! # ...
//! # end field
//! ```
//!
//! which OBJ readers ignore, and the first field is also written as RGB
//! vertex colors to a `.colors` sidecar, one `r g b` line per vertex.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use surfflow_core::mesh::SurfaceMesh;

use crate::atomic::write_atomic;
use crate::error::{IoError, IoResult};

pub fn mesh_to_obj(mesh: &SurfaceMesh, time: f64, fields: &[(&str, &[f64])]) -> IoResult<String> {
    let mut s = String::new();
    let _ = writeln!(s, "# surfflow snapshot t = {time:.16e}");
    for (name, values) in fields {
        if values.len() != mesh.vertex_count() {
            return Err(surfflow_core::Error::Dimension { expected: mesh.vertex_count(), got: values.len() }.into());
        }
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(IoError::config("field", format!("field names must be non-empty words, got {name:?}")));
        }
        let _ = writeln!(s, "# field {name}");
        for v in values.iter() {
            let _ = writeln!(s, "# {v:.16e}");
        }
        let _ = writeln!(s, "# end field");
    }
    for p in mesh.positions() {
        let _ = writeln!(s, "v {:.16e} {:.16e} {:.16e}", p.x(), p.y(), p.z());
    }
    for [a, b, c] in mesh.triangles() {
        let _ = writeln!(s, "f {} {} {}", a + 1, b + 1, c + 1);
    }
    Ok(s)
}

/// Sidecar path: `snap.obj` becomes `snap.colors`.
pub fn colors_path(obj: &Path) -> PathBuf {
    obj.with_extension("colors")
}

/// Blue at -1, white at 0, red at +1.
pub fn phase_color(s: f64) -> [f64; 3] {
    let s = if s.is_finite() { s.clamp(-1.0, 1.0) } else { 0.0 };
    if s >= 0.0 {
        [1.0, 1.0 - s, 1.0 - s]
    } else {
        [1.0 + s, 1.0 + s, 1.0]
    }
}

/// Writes the OBJ and, if there is at least one field, the color sidecar.
/// Returns the paths written.
pub fn write_mesh_obj(mesh: &SurfaceMesh, time: f64, fields: &[(&str, &[f64])], path: &Path) -> IoResult<Vec<PathBuf>> {
    write_atomic(path, mesh_to_obj(mesh, time, fields)?.as_bytes())?;
    let mut written = vec![path.to_path_buf()];
    if let Some((_, values)) = fields.first() {
        let mut c = String::new();
        for v in values.iter() {
            let [r, g, b] = phase_color(*v);
            let _ = writeln!(c, "{r:.6} {g:.6} {b:.6}");
        }
        let side = colors_path(path);
        write_atomic(&side, c.as_bytes())?;
        written.push(side);
    }
    Ok(written)
}

/// Reads the comment block of field `name` back from OBJ text.
pub fn read_obj_field(text: &str, name: &str) -> Option<Vec<f64>> {
    let header = format!("# field {name}");
    let mut lines = text.lines().skip_while(|l| *l != header);
    lines.next()?;
    let mut out = Vec::new();
    for l in lines {
        if l == "# end field" {
            return Some(out);
        }
        out.push(l.strip_prefix("# ")?.parse().ok()?);
    }
    None
}
