//! Triangle meshes from sampled grids, and the OBJ / PLY / CSV writers.
//!
//! Each grid cell whose four corners are unmasked becomes two counterclockwise triangles
//! (counterclockwise in the parameter plane). Vertices keep the row-major grid order with
//! masked points skipped.

use std::io::{self, Write};

use thiserror::Error;

use crate::surface::{MaskReason, SampledGrid};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("no regular points in the domain")]
    NoRegularPoints,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mesh {
    pub positions: Vec<[f64; 3]>,
    pub normals: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
}

impl Mesh {
    pub fn from_grid(grid: &SampledGrid) -> Result<Self, MeshError> {
        let mut remap = vec![None; grid.samples.len()];
        let mut mesh = Mesh::default();
        for (k, s) in grid.samples.iter().enumerate() {
            if let Some(e) = s.eval() {
                remap[k] = Some(mesh.positions.len() as u32);
                mesh.positions.push(e.x);
                mesh.normals.push(e.n);
            }
        }
        if mesh.positions.is_empty() {
            return Err(MeshError::NoRegularPoints);
        }
        let [n1, n2] = grid.nu;
        let cols = if grid.periodic { n2 } else { n2 - 1 };
        for i in 0..n1 - 1 {
            for j in 0..cols {
                let jn = (j + 1) % n2;
                let corners = [(i, j), (i + 1, j), (i + 1, jn), (i, jn)].map(|(a, b)| remap[grid.index(a, b)]);
                if let [Some(a), Some(b), Some(c), Some(d)] = corners {
                    mesh.triangles.push([a, b, c]);
                    mesh.triangles.push([a, c, d]);
                }
            }
        }
        Ok(mesh)
    }

    pub fn write_obj(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "# ssforge: {} vertices, {} triangles", self.positions.len(), self.triangles.len())?;
        for [x, y, z] in &self.positions {
            writeln!(w, "v {x} {y} {z}")?;
        }
        for [x, y, z] in &self.normals {
            writeln!(w, "vn {x} {y} {z}")?;
        }
        for t in &self.triangles {
            let [a, b, c] = t.map(|k| k + 1);
            writeln!(w, "f {a}//{a} {b}//{b} {c}//{c}")?;
        }
        Ok(())
    }

    pub fn write_ply(&self, w: &mut impl Write) -> io::Result<()> {
        write!(
            w,
            "ply\nformat binary_little_endian 1.0\ncomment generated by ssforge\n\
             element vertex {}\n\
             property float x\nproperty float y\nproperty float z\n\
             property float nx\nproperty float ny\nproperty float nz\n\
             element face {}\nproperty list uchar int vertex_indices\nend_header\n",
            self.positions.len(),
            self.triangles.len()
        )?;
        for (p, n) in self.positions.iter().zip(&self.normals) {
            for c in p.iter().chain(n) {
                w.write_all(&(*c as f32).to_le_bytes())?;
            }
        }
        for t in &self.triangles {
            w.write_all(&[3u8])?;
            for k in t {
                w.write_all(&(*k as i32).to_le_bytes())?;
            }
        }
        Ok(())
    }
}

pub const CSV_HEADER: [&str; 17] = [
    "u1",
    "u2",
    "x",
    "y",
    "z",
    "nx",
    "ny",
    "nz",
    "h",
    "H",
    "K",
    "psi",
    "lambda",
    "det_v",
    "ss_residual",
    "midsphere_residual",
    "mask",
];

/// One row per grid point in row-major order. Masked rows keep `u1,u2` and the mask reason
/// and leave the other fields empty; the mask column is empty for regular points.
pub fn write_csv(grid: &SampledGrid, w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "{}", CSV_HEADER.join(","))?;
    for s in &grid.samples {
        write!(w, "{:e},{:e}", s.u[0], s.u[1])?;
        match &s.result {
            Ok(e) => {
                let fields = [
                    e.x[0],
                    e.x[1],
                    e.x[2],
                    e.n[0],
                    e.n[1],
                    e.n[2],
                    e.support,
                    e.mean_curvature,
                    e.gauss_curvature,
                    e.psi,
                    e.lambda,
                    e.v.det(),
                    e.ss_residual,
                    e.midsphere_residual,
                ];
                for v in fields {
                    write!(w, ",{v:e}")?;
                }
                writeln!(w, ",")?;
            }
            Err(reason) => writeln!(w, "{},{}", ",".repeat(14), MaskReason::as_str(*reason))?,
        }
    }
    Ok(())
}
