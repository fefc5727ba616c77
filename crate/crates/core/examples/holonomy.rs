//! Writes the holonomy representation of a triangulated manifold in `.hol` format.
use cuspkit::hmodel::Tolerance;
use cuspkit::triangulate::write_holonomy;
use cuspkit::Manifold;

fn main() -> anyhow::Result<()> {
    let path = std::env::args().nth(1).ok_or_else(|| anyhow::anyhow!("usage: holonomy FILE.tri"))?;
    let m = Manifold::load(path.as_ref(), Tolerance::default())?;
    print!("{}", write_holonomy(&m.holonomy));
    Ok(())
}
