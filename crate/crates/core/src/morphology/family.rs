use std::fmt::Write as _;
use std::path::Path;

use super::{convex_decompose, morph, ConvexDecomposition, Mesh2, MorphError};

/// Source, four intermediates, target.
pub const DEFAULT_TS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Clone, Debug)]
pub struct MorphFamily {
    pub source: Mesh2,
    pub target: Mesh2,
    pub ts: Vec<f64>,
    pub shapes: Vec<Mesh2>,
    pub decompositions: Vec<ConvexDecomposition>,
}

impl MorphFamily {
    pub fn build(source: Mesh2, target: Mesh2, ts: &[f64], density: f64) -> Result<Self, MorphError> {
        if ts.is_empty() || ts.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(MorphError::InvalidMesh {
                name: target.name.clone(),
                msg: "ts must be non-empty and strictly increasing".into(),
            });
        }
        let mut shapes = Vec::with_capacity(ts.len());
        let mut decompositions = Vec::with_capacity(ts.len());
        for &t in ts {
            let mut m = morph(&source, &target, t)?;
            m.name = format!("morph({t})");
            decompositions.push(convex_decompose(&m, density)?);
            shapes.push(m);
        }
        Ok(Self {
            source,
            target,
            ts: ts.to_vec(),
            shapes,
            decompositions,
        })
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn density(&self) -> f64 {
        self.decompositions[0].density
    }

    /// Writes every member mesh plus a `family.manifest` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), MorphError> {
        let io = |source| MorphError::Io {
            path: dir.display().to_string(),
            source,
        };
        std::fs::create_dir_all(dir).map_err(io)?;
        self.source.save(&dir.join("source.mesh"))?;
        self.target.save(&dir.join("target.mesh"))?;
        let mut s = String::from("# morph family: shape id, t, mesh file\n");
        let _ = writeln!(s, "source source.mesh");
        let _ = writeln!(s, "target target.mesh");
        let _ = writeln!(s, "density {:.16e}", self.density());
        for (i, (t, m)) in self.ts.iter().zip(&self.shapes).enumerate() {
            let file = format!("shape_{i}.mesh");
            m.save(&dir.join(&file))?;
            let _ = writeln!(s, "shape {i} {t:.16e} {file}");
        }
        std::fs::write(dir.join("family.manifest"), s).map_err(io)
    }

    /// Reads a manifest and rebuilds the family from its source, target and ts.
    pub fn load(manifest: &Path) -> Result<Self, MorphError> {
        let text = std::fs::read_to_string(manifest).map_err(|source| MorphError::Io {
            path: manifest.display().to_string(),
            source,
        })?;
        let dir = manifest.parent().unwrap_or(Path::new("."));
        let (mut source, mut target, mut density, mut ts) = (None, None, None, Vec::new());
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| MorphError::Parse { line: i + 1, msg: msg.to_string() };
            let tok: Vec<&str> = line.split_whitespace().collect();
            match tok.as_slice() {
                ["source", f] => source = Some(Mesh2::load(&dir.join(f))?),
                ["target", f] => target = Some(Mesh2::load(&dir.join(f))?),
                ["density", d] => density = Some(d.parse::<f64>().map_err(|_| err("bad density"))?),
                ["shape", _, t, _] | ["t", t] => ts.push(t.parse::<f64>().map_err(|_| err("bad t"))?),
                _ => return Err(err("expected source|target|density|shape record")),
            }
        }
        let missing = |what: &str| MorphError::Parse { line: 0, msg: format!("manifest missing `{what}`") };
        let ts = if ts.is_empty() { DEFAULT_TS.to_vec() } else { ts };
        Self::build(
            source.ok_or_else(|| missing("source"))?,
            target.ok_or_else(|| missing("target"))?,
            &ts,
            density.ok_or_else(|| missing("density"))?,
        )
    }
}
