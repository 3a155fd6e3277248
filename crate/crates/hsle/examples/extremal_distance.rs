//! Discrete extremal distance between opposite sides of rectangles.

use hsle::interfaces::discrete_extremal_distance;
use hsle::lattice::LatticeQuad;

fn main() -> hsle::Result<()> {
    for (w, h) in [(8, 8), (16, 8), (8, 16), (32, 32)] {
        let q = LatticeQuad::rectangle(w, h)?;
        // between the bottom and top arcs
        let m = discrete_extremal_distance(&q, &q.arc_walls(0), &q.arc_walls(2))?;
        println!("{w}x{h}: extremal distance {:.6} (h/w = {:.6})", m.value, h as f64 / w as f64);
    }
    Ok(())
}
