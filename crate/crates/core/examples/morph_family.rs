//! Builds the square-to-star family, prints per-shape mass properties and
//! writes the meshes plus a manifest to a temporary directory.

use inhand::morphology::{mass_properties, Mesh2, MorphFamily, DEFAULT_TS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source = Mesh2::square("square", 0.06);
    let target = Mesh2::star("star", 6, 0.068, 0.02)?;
    let family = MorphFamily::build(source, target, &DEFAULT_TS, 10.0)?;
    for ((t, shape), decomp) in family.ts.iter().zip(&family.shapes).zip(&family.decompositions) {
        let mp = mass_properties(decomp);
        println!(
            "t = {t:.1}: {} vertices, area {:.2} cm^2, {} convex parts, mass {:.1} g, inertia {:.3e} kg m^2",
            shape.len(),
            shape.area() * 1e4,
            decomp.parts.len(),
            mp.mass * 1e3,
            mp.inertia
        );
    }
    let dir = std::env::temp_dir().join("inhand_morph_family");
    family.save(&dir)?;
    println!("wrote {}", dir.display());
    Ok(())
}
