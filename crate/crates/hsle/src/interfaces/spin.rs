//! Spin interfaces: the walk on cell corners keeping the spin of its first
//! left cell on the left and the opposite spin on the right.

use super::{turn_sign, InterfacePath, LatticeKind, TurnRule};
use crate::error::{Error, Result};
use crate::lattice::{LatticeQuad, SpinConfig};

/// Traces the interface entering the quad at mark `start_mark`.
///
/// The first edge separates the ring sites just before and at the mark; the
/// spin of the earlier one goes on the left. At a corner with the two cells
/// ahead of opposite spins the other way round, `rule` picks the turn.
pub fn trace_spin_interface(
    q: &LatticeQuad,
    cfg: &SpinConfig,
    start_mark: usize,
    rule: TurnRule,
) -> Result<InterfacePath> {
    if start_mark >= q.marks().len() {
        return Err(Error::Domain(format!("no mark {start_mark}")));
    }
    let ring = q.ring();
    let m = q.marks()[start_mark];
    let s = ring[(m + ring.len() - 1) % ring.len()];
    let s2 = ring[m];
    let (a, b) = (q.coords(s), q.coords(s2));
    let delta = (b.0 as i64 - a.0 as i64, b.1 as i64 - a.1 as i64);
    if delta.0.abs() + delta.1.abs() != 1 {
        return Err(Error::NoInterface(format!("ring sites around mark {start_mark} are not adjacent")));
    }
    let spin = |x: i64, y: i64| -> Option<i8> {
        q.contains(x, y).then(|| cfg.spins[q.site(x as usize, y as usize)])
    };
    let left = cfg.spins[s];
    if left == cfg.spins[s2] {
        return Err(Error::NoInterface(format!("no sign change across mark {start_mark}")));
    }
    let mut d = (-delta.1, delta.0);
    let c0 = (
        (2 * a.0 as i64 + delta.0 + 1 - d.0) / 2,
        (2 * a.1 as i64 + delta.1 + 1 - d.1) / 2,
    );
    let interior = |c: (i64, i64)| {
        [(0, 0), (-1, 0), (0, -1), (-1, -1)].iter().all(|&(dx, dy)| q.contains(c.0 + dx, c.1 + dy))
    };
    let mut c = (c0.0 + d.0, c0.1 + d.1);
    let mut vertices = vec![c0, c];
    let mut turns = vec![0i8, 0];
    let cap = 4 * (q.width() + 1) * (q.height() + 1);
    while interior(c) {
        if vertices.len() > cap {
            return Err(Error::InconsistentConfig("spin interface does not terminate".into()));
        }
        let n = (-d.1, d.0);
        let ahead_left = spin((2 * c.0 + d.0 + n.0 - 1) / 2, (2 * c.1 + d.1 + n.1 - 1) / 2);
        let ahead_right = spin((2 * c.0 + d.0 - n.0 - 1) / 2, (2 * c.1 + d.1 - n.1 - 1) / 2);
        let (al, ar) = (ahead_left == Some(left), ahead_right == Some(left));
        let e = match (al, ar) {
            (true, false) => d,
            (false, false) => n,
            (true, true) => (-n.0, -n.1),
            (false, true) => match rule {
                TurnRule::Left => n,
                TurnRule::Right => (-n.0, -n.1),
            },
        };
        *turns.last_mut().unwrap() = turn_sign(d, e);
        d = e;
        c = (c.0 + d.0, c.1 + d.1);
        vertices.push(c);
        turns.push(0);
    }
    let end_mark = end_mark_of(q, &vertices);
    Ok(InterfacePath { kind: LatticeKind::Primal, vertices, turns, rule, left, start_mark, end_mark })
}

/// The mark whose entry edge is the last edge of the path, if any.
fn end_mark_of(q: &LatticeQuad, v: &[(i64, i64)]) -> Option<usize> {
    let (p, c) = (v[v.len() - 2], v[v.len() - 1]);
    let ring = q.ring();
    (0..q.marks().len()).find(|&k| {
        let m = q.marks()[k];
        let (a, b) = (q.coords(ring[(m + ring.len() - 1) % ring.len()]), q.coords(ring[m]));
        let delta = (b.0 as i64 - a.0 as i64, b.1 as i64 - a.1 as i64);
        let d = (-delta.1, delta.0);
        let c0 = ((2 * a.0 as i64 + delta.0 + 1 - d.0) / 2, (2 * a.1 as i64 + delta.1 + 1 - d.1) / 2);
        let c1 = (c0.0 + d.0, c0.1 + d.1);
        (p, c) == (c1, c0)
    })
}
