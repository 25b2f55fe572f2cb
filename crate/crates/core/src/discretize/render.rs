use std::path::Path;

use rayon::prelude::*;

use super::mesh::TriMesh;
use super::DiscretizeError;
use crate::cp_core::Vec3;

pub const DEFAULT_IMAGE_SIZE: usize = 512;
pub const BACKGROUND: [u8; 3] = [255, 255, 255];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderImage {
    pub width: usize,
    pub height: usize,
    /// RGB rows, top to bottom.
    pub pixels: Vec<u8>,
}

impl RenderImage {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let o = 3 * (y * self.width + x);
        [self.pixels[o], self.pixels[o + 1], self.pixels[o + 2]]
    }

    pub fn foreground_fraction(&self) -> f64 {
        let fg = self.pixels.chunks(3).filter(|p| *p != BACKGROUND).count();
        fg as f64 / (self.width * self.height) as f64
    }

    pub fn png_bytes(&self) -> Result<Vec<u8>, DiscretizeError> {
        let img = image::RgbImage::from_raw(self.width as u32, self.height as u32, self.pixels.clone())
            .ok_or_else(|| DiscretizeError::Io("pixel buffer size mismatch".into()))?;
        let mut out = std::io::Cursor::new(Vec::new());
        img.write_to(&mut out, image::ImageFormat::Png).map_err(|e| DiscretizeError::Io(e.to_string()))?;
        Ok(out.into_inner())
    }

    pub fn ppm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn save_png(&self, path: &Path) -> Result<(), DiscretizeError> {
        std::fs::write(path, self.png_bytes()?).map_err(|e| DiscretizeError::Io(format!("{}: {e}", path.display())))
    }

    pub fn save_ppm(&self, path: &Path) -> Result<(), DiscretizeError> {
        std::fs::write(path, self.ppm_bytes()).map_err(|e| DiscretizeError::Io(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum View {
    Top,
    Front,
    Right,
    Angled,
}

impl View {
    /// Order used for files and prompts.
    pub const ALL: [View; 4] = [View::Top, View::Front, View::Right, View::Angled];

    pub fn name(self) -> &'static str {
        match self {
            View::Top => "top",
            View::Front => "front",
            View::Right => "right",
            View::Angled => "angled",
        }
    }

    /// Viewing direction (from the camera into the scene).
    pub fn direction(self) -> Vec3 {
        match self {
            View::Front => Vec3::new(0.0, 1.0, 0.0),
            View::Top => Vec3::new(0.0, 0.0, -1.0),
            View::Right => Vec3::new(-1.0, 0.0, 0.0),
            View::Angled => Vec3::new(-1.0, 1.0, -1.0).normalize(),
        }
    }

    fn up_hint(self) -> Vec3 {
        match self {
            View::Top => Vec3::new(0.0, 1.0, 0.0),
            _ => Vec3::new(0.0, 0.0, 1.0),
        }
    }

    /// Image-plane basis (right, up).
    pub fn basis(self) -> (Vec3, Vec3) {
        let d = self.direction();
        let right = d.cross(&self.up_hint()).normalize();
        let up = right.cross(&d);
        (right, up)
    }
}

/// Orthographic depth-buffered rendering of the mesh framed on the unit cell.
pub fn render_view(mesh: &TriMesh, view: View, size: usize) -> RenderImage {
    let d = view.direction();
    let (right, up) = view.basis();
    let center = Vec3::repeat(0.5);
    let mut half = 0.0f64;
    for c in 0..8 {
        let corner = Vec3::new((c & 1) as f64, ((c >> 1) & 1) as f64, ((c >> 2) & 1) as f64) - center;
        half = half.max(corner.dot(&right).abs()).max(corner.dot(&up).abs());
    }
    let scale = size as f64 / (2.0 * half);
    // Screen coordinates: x to the right, y downwards, in pixels.
    let project = |p: &Vec3| {
        let q = p - center;
        (q.dot(&right) * scale + size as f64 / 2.0, size as f64 / 2.0 - q.dot(&up) * scale, q.dot(&d))
    };
    let screen: Vec<(f64, f64, f64)> = mesh.vertices.iter().map(project).collect();

    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); size];
    for (ti, t) in mesh.triangles.iter().enumerate() {
        let ys = [screen[t[0]].1, screen[t[1]].1, screen[t[2]].1];
        let lo = (ys.iter().cloned().fold(f64::INFINITY, f64::min) - 0.5).ceil().max(0.0) as usize;
        let hi = (ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - 0.5).floor();
        if hi < 0.0 {
            continue;
        }
        for row in rows.iter_mut().take((hi as usize + 1).min(size)).skip(lo) {
            row.push(ti);
        }
    }

    let mut pixels = vec![255u8; size * size * 3];
    pixels.par_chunks_mut(size * 3).enumerate().for_each(|(y, line)| {
        let py = y as f64 + 0.5;
        let mut depth = vec![f64::INFINITY; size];
        for &ti in &rows[y] {
            let t = mesh.triangles[ti];
            let (a, b, c) = (screen[t[0]], screen[t[1]], screen[t[2]]);
            let area = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
            if area.abs() < 1e-12 {
                continue;
            }
            let shade = mesh.normals[ti].dot(&d).abs();
            let g = (40.0 + 200.0 * shade).round() as u8;
            let xs = [a.0, b.0, c.0];
            let x0 = (xs.iter().cloned().fold(f64::INFINITY, f64::min) - 0.5).ceil().max(0.0) as usize;
            let x1 = (xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - 0.5).floor();
            if x1 < 0.0 {
                continue;
            }
            for x in x0..=(x1 as usize).min(size - 1) {
                let px = x as f64 + 0.5;
                let w0 = ((b.0 - px) * (c.1 - py) - (b.1 - py) * (c.0 - px)) / area;
                let w1 = ((c.0 - px) * (a.1 - py) - (c.1 - py) * (a.0 - px)) / area;
                let w2 = 1.0 - w0 - w1;
                if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
                    continue;
                }
                let z = w0 * a.2 + w1 * b.2 + w2 * c.2;
                if z < depth[x] {
                    depth[x] = z;
                    line[3 * x..3 * x + 3].copy_from_slice(&[g, g, g]);
                }
            }
        }
    });
    RenderImage { width: size, height: size, pixels }
}

/// The four standard views in [`View::ALL`] order.
pub fn render_views(mesh: &TriMesh, size: usize) -> Vec<RenderImage> {
    View::ALL.iter().map(|&v| render_view(mesh, v, size)).collect()
}
