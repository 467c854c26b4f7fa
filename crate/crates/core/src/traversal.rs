//! Supercover traversal of a segment through a unit-cell lattice.
//!
//! Coordinates are continuous cell coordinates (see
//! [`GridSpec::to_cell_coords`](crate::grid::GridSpec::to_cell_coords)):
//! cell `(i, j)` covers `[i, i+1) × [j, j+1)`. The traversal yields every
//! cell the segment enters, in order. When the segment passes exactly
//! through a lattice corner both side cells are emitted before the diagonal
//! one, so consecutive cells never leave a diagonal gap.

/// Offset (cell units) used to decide which cell a segment starts in or
/// finishes in when an endpoint lies on a cell boundary.
const ENDPOINT_NUDGE: f64 = 1e-9;
/// Passing within this distance (cell units) of a corner counts as through it.
const CORNER_EPS: f64 = 1e-9;

/// Iterator over the cells touched by a segment.
#[derive(Debug, Clone)]
pub struct Supercover {
    cur: (i64, i64),
    end: (i64, i64),
    step: (i64, i64),
    t_max: (f64, f64),
    t_delta: (f64, f64),
    speed: f64,
    pending: [(i64, i64); 3],
    pending_len: usize,
    pending_pos: usize,
    remaining: u64,
    started: bool,
    finished: bool,
}

impl Supercover {
    pub fn new(start: (f64, f64), end: (f64, f64)) -> Self {
        let (u0, v0) = start;
        let (u1, v1) = end;
        let du = u1 - u0;
        let dv = v1 - v0;
        let len = du.hypot(dv);
        let (nu, nv) = if len > 0.0 { (du / len, dv / len) } else { (0.0, 0.0) };

        let first = (
            (u0 + ENDPOINT_NUDGE * nu).floor() as i64,
            (v0 + ENDPOINT_NUDGE * nv).floor() as i64,
        );
        let last = if len > ENDPOINT_NUDGE {
            (
                (u1 - ENDPOINT_NUDGE * nu).floor() as i64,
                (v1 - ENDPOINT_NUDGE * nv).floor() as i64,
            )
        } else {
            first
        };

        let axis = |p0: f64, d: f64, cell: i64| -> (i64, f64, f64) {
            if d > 0.0 {
                (1, (cell as f64 + 1.0 - p0) / d, 1.0 / d)
            } else if d < 0.0 {
                (-1, (cell as f64 - p0) / d, -1.0 / d)
            } else {
                (0, f64::INFINITY, f64::INFINITY)
            }
        };
        let (su, tu, dtu) = axis(u0, du, first.0);
        let (sv, tv, dtv) = axis(v0, dv, first.1);

        let remaining = (last.0 - first.0).unsigned_abs() + (last.1 - first.1).unsigned_abs() + 2;
        Supercover {
            cur: first,
            end: last,
            step: (su, sv),
            t_max: (tu, tv),
            t_delta: (dtu, dtv),
            speed: du.abs().max(dv.abs()),
            pending: [(0, 0); 3],
            pending_len: 0,
            pending_pos: 0,
            remaining,
            started: false,
            finished: false,
        }
    }

    fn advance(&mut self) {
        let (tu, tv) = self.t_max;
        let (su, sv) = self.step;
        if (tu - tv).abs() * self.speed <= CORNER_EPS {
            let (u, v) = self.cur;
            self.pending = [(u + su, v), (u, v + sv), (u + su, v + sv)];
            self.pending_len = 3;
            self.t_max = (tu + self.t_delta.0, tv + self.t_delta.1);
            self.cur = (u + su, v + sv);
        } else if tu < tv {
            self.cur.0 += su;
            self.t_max.0 += self.t_delta.0;
            self.pending = [self.cur, (0, 0), (0, 0)];
            self.pending_len = 1;
        } else {
            self.cur.1 += sv;
            self.t_max.1 += self.t_delta.1;
            self.pending = [self.cur, (0, 0), (0, 0)];
            self.pending_len = 1;
        }
        self.pending_pos = 0;
    }
}

impl Iterator for Supercover {
    type Item = (i64, i64);

    fn next(&mut self) -> Option<(i64, i64)> {
        if !self.started {
            self.started = true;
            if self.cur == self.end {
                self.finished = true;
            }
            return Some(self.cur);
        }
        if self.pending_pos < self.pending_len {
            let c = self.pending[self.pending_pos];
            self.pending_pos += 1;
            return Some(c);
        }
        if self.finished || self.remaining == 0 {
            return None;
        }
        // Float drift can only ever push a crossing past the far end.
        if self.t_max.0.min(self.t_max.1) > 1.0 + CORNER_EPS {
            return None;
        }
        self.remaining -= 1;
        self.advance();
        if self.cur == self.end {
            self.finished = true;
        }
        self.pending_pos = 1;
        Some(self.pending[0])
    }
}

/// Collects the supercover of a segment.
pub fn supercover(start: (f64, f64), end: (f64, f64)) -> Vec<(i64, i64)> {
    Supercover::new(start, end).collect()
}
