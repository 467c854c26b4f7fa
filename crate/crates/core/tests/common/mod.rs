//! Oracles and fixtures shared by the integration tests. Everything here is
//! written independently of the library's own algorithms.

#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Parameter interval `[t_in, t_out]` over which the ray `o + t d`, `t >= 0`,
/// lies inside the unit cell `[r, r+1] x [c, c+1]`, if non-empty.
pub fn slab(o: (f64, f64), d: (f64, f64), r: usize, c: usize) -> Option<(f64, f64)> {
    let mut lo = 0.0f64;
    let mut hi = f64::INFINITY;
    for (oi, di, min) in [(o.0, d.0, r as f64), (o.1, d.1, c as f64)] {
        let max = min + 1.0;
        if di == 0.0 {
            if oi < min || oi > max {
                return None;
            }
        } else {
            let (a, b) = ((min - oi) / di, (max - oi) / di);
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
    }
    (hi > lo).then_some((lo, hi))
}

/// Visibility by dense angular sampling: `rays` rays at equal angular
/// spacing, each walking the cells it crosses (positive length) in order of
/// entry. The cell holding the sensor never blocks; a blocking cell is
/// itself visible.
pub fn sampled_visibility(rows: usize, cols: usize, blocking: &[bool], sensor: (f64, f64), rays: usize) -> Vec<bool> {
    let mut visible = vec![false; rows * cols];
    let mut crossed: Vec<(f64, usize)> = Vec::new();
    for k in 0..rays {
        let a = TAU * k as f64 / rays as f64;
        let d = (a.cos(), a.sin());
        crossed.clear();
        for r in 0..rows {
            for c in 0..cols {
                if let Some((t_in, _)) = slab(sensor, d, r, c) {
                    crossed.push((t_in, r * cols + c));
                }
            }
        }
        crossed.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (i, &(_, idx)) in crossed.iter().enumerate() {
            visible[idx] = true;
            if i > 0 && blocking[idx] {
                break;
            }
        }
    }
    visible
}

/// A random occlusion fixture: grid size, blockers and a sensor position in
/// continuous cell coordinates.
pub struct OcclusionFixture {
    pub rows: usize,
    pub cols: usize,
    pub blocking: Vec<bool>,
    pub sensor: (f64, f64),
}

pub fn occlusion_fixture<R: Rng>(rng: &mut R, max_side: usize) -> OcclusionFixture {
    let rows = rng.random_range(2..=max_side);
    let cols = rng.random_range(2..=max_side);
    let density = rng.random_range(0.02..0.25);
    let blocking = (0..rows * cols).map(|_| rng.random_bool(density)).collect();
    let sensor = (rng.random_range(0.0..rows as f64), rng.random_range(0.0..cols as f64));
    OcclusionFixture {
        rows,
        cols,
        blocking,
        sensor,
    }
}

/// Subset bitmasks of the stored hypotheses, in storage order
/// `F, O_s, O_d, {O_s,O_d}, Θ`.
pub const SUBSETS: [u8; 5] = [0b001, 0b010, 0b100, 0b110, 0b111];

/// Dempster's rule as a plain double loop over all 25 focal-set pairs.
/// `None` under total conflict.
pub fn dempster_oracle(a: &[f64; 5], b: &[f64; 5]) -> Option<[f64; 5]> {
    let mut joint = [0.0f64; 5];
    let mut conflict = 0.0f64;
    for i in 0..5 {
        for j in 0..5 {
            let meet = SUBSETS[i] & SUBSETS[j];
            let p = a[i] * b[j];
            if meet == 0 {
                conflict += p;
            } else {
                let k = SUBSETS
                    .iter()
                    .position(|&s| s == meet)
                    .expect("closed under intersection");
                joint[k] += p;
            }
        }
    }
    if conflict >= 1.0 - 1e-12 {
        return None;
    }
    let m = joint.map(|v| v / (1.0 - conflict));
    // The result must come out normalized: rounding drift beyond the slack,
    // or a component above 1, is divided out.
    let sum: f64 = m.iter().sum();
    if (sum - 1.0).abs() > 1e-12 || m.iter().any(|&v| v > 1.0) {
        return Some(m.map(|v| v / sum));
    }
    Some(m)
}

/// A random normalized mass vector; each focal set is absent with
/// probability 0.3 so sparse masses are well represented.
pub fn random_masses<R: Rng>(rng: &mut R) -> [f64; 5] {
    loop {
        let w: [f64; 5] = std::array::from_fn(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() });
        let s: f64 = w.iter().sum();
        if s > 0.0 {
            return w.map(|v| v / s);
        }
    }
}

/// Label a cell the way the evaluation protocol defines it, written out
/// longhand. 0 = F, 1 = O_s, 2 = O_d, 3 = O_sd, 4 = unknown.
pub fn naive_label(m: &[f64; 5], threshold: f64) -> usize {
    for k in 0..3 {
        if m[k] > threshold {
            return k;
        }
    }
    if m[1] + m[2] + m[3] > threshold {
        3
    } else {
        4
    }
}

/// Per-state `(tp, fp, fn)` for F, O_s, O_d and O_sd, plus the number of
/// evaluated cells.
pub fn naive_confusion(
    pred: &[[f64; 5]],
    truth: &[[f64; 5]],
    threshold: f64,
    mask: f64,
) -> ([(u64, u64, u64); 4], u64) {
    let mut out = [(0u64, 0u64, 0u64); 4];
    let mut evaluated = 0;
    for (p, t) in pred.iter().zip(truth) {
        if t[4] >= mask {
            continue;
        }
        let tl = naive_label(t, threshold);
        evaluated += 1;
        let pl = naive_label(p, threshold);
        for s in 0..4 {
            let hit = |l: usize| if s == 3 { (1..=3).contains(&l) } else { l == s };
            match (hit(pl), hit(tl)) {
                (true, true) => out[s].0 += 1,
                (true, false) => out[s].1 += 1,
                (false, true) => out[s].2 += 1,
                _ => {}
            }
        }
    }
    (out, evaluated)
}

use evidential_ogm::annotation::{AnnotatedBox, AnnotatedSample, DrivableMap};
use evidential_ogm::cloud::{LidarPoint, PointCloud};
use evidential_ogm::footprint::BevRect;
use evidential_ogm::grid::GridSpec;

/// A random annotated sample on a grid of at most `max_side` cells a side.
/// Roughly half the boxes get enough points to qualify as observed.
pub fn annotated_fixture<R: Rng>(rng: &mut R, max_side: usize) -> (GridSpec, AnnotatedSample) {
    let rows = rng.random_range(4..=max_side);
    let cols = rng.random_range(4..=max_side);
    let spec = GridSpec::from_cells(rows, cols, 0.5).unwrap();
    let (hx, hy) = (spec.length_m() / 2.0, spec.width_m() / 2.0);
    let drivable_p = rng.random_range(0.5..1.0);
    let drivable = DrivableMap::new(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.random_bool(drivable_p)).collect(),
    )
    .unwrap();
    let mut boxes = Vec::new();
    let mut points = Vec::new();
    for id in 0..rng.random_range(0..5u32) {
        let rect = BevRect::new(
            (rng.random_range(-hx..hx), rng.random_range(-hy..hy)),
            rng.random_range(0.4..3.0),
            rng.random_range(0.4..2.0),
            rng.random_range(-3.2..3.2),
        );
        let n = if rng.random_bool(0.5) {
            rng.random_range(20..40)
        } else {
            rng.random_range(0..20)
        };
        for _ in 0..n {
            // Points inside the rectangle, in its local frame.
            let (a, b) = (
                rng.random_range(-0.49..0.49) * rect.length,
                rng.random_range(-0.49..0.49) * rect.width,
            );
            let (s, c) = rect.yaw.sin_cos();
            points.push(LidarPoint::new(
                rect.center.0 + a * c - b * s,
                rect.center.1 + a * s + b * c,
                0.8,
                0.5,
                0,
            ));
        }
        boxes.push(AnnotatedBox { id, rect });
    }
    let sensor_origin = (rng.random_range(-hx..hx), rng.random_range(-hy..hy));
    let sample = AnnotatedSample {
        cloud: points.into_iter().collect::<PointCloud>(),
        boxes,
        drivable,
        sensor_origin,
    };
    (spec, sample)
}

use evidential_ogm::evidence::{BeliefMass, Hypothesis};
use evidential_ogm::grid::EvidentialGrid;

/// Random grid for evaluation tests: a mix of crisp cells, simple masses
/// (including exact threshold ties) and general masses.
pub fn random_eval_grid<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> EvidentialGrid {
    let spec = GridSpec::from_cells(rows, cols, 1.0).unwrap();
    let cells = (0..rows * cols)
        .map(|_| match rng.random_range(0..4) {
            0 => BeliefMass::certain(Hypothesis::ALL[rng.random_range(0..5)]),
            1 => {
                let v = [0.3, 0.5, 0.6, 0.9][rng.random_range(0..4)];
                BeliefMass::simple(Hypothesis::ALL[rng.random_range(0..4)], v).unwrap()
            }
            _ => BeliefMass::from_array(random_masses(rng)).unwrap(),
        })
        .collect();
    EvidentialGrid::from_cells(spec, cells).unwrap()
}
