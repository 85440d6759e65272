//! Ring and strip-crossing detection on classified grids.
//!
//! A ring exists at radius class `r` when the fast-escaping pixels of
//! modulus at most `r` separate the origin pixel from the grid frame
//! (4-connected flood on the complement, 8-connected loops — the standard
//! discrete Jordan pairing). The nested count is the number of radius
//! classes with a ring.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::FamilyParams;
use crate::gridfile::class_to_byte;
use crate::maxmod::maxmod_ladder;
use crate::orbit::OrbitClass;
use crate::render::{classify_grid, GridSpec, DEFAULT_TILE};

/// Number of radius classes swept over `(0, r_max]`.
pub const RADIUS_CLASSES: usize = 64;

/// Nested-ring evidence extracted from one classification grid.
///
/// `rings` holds pairwise-disjoint representative loops (cyclic pixel index
/// lists, innermost first), each verified by flood fill to separate the
/// origin pixel from the frame. `nested_count` is the number of radius
/// classes at which separation holds.
#[derive(Debug, Clone)]
pub struct RingReport {
    pub rings: Vec<Vec<(u32, u32)>>,
    pub nested_count: usize,
}

struct Flood {
    region: Vec<bool>,
    reached_frame: bool,
    size: usize,
}

/// 4-connected flood from `origin` over non-blocked pixels.
fn flood_fill(blocked: &[bool], w: usize, h: usize, origin: usize) -> Flood {
    let mut region = vec![false; w * h];
    let mut reached_frame = false;
    let mut size = 0usize;
    if blocked[origin] {
        return Flood {
            region,
            reached_frame,
            size,
        };
    }
    let mut queue = VecDeque::new();
    region[origin] = true;
    queue.push_back(origin);
    while let Some(idx) = queue.pop_front() {
        size += 1;
        let (x, y) = (idx % w, idx / w);
        if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
            reached_frame = true;
        }
        let mut push = |n: usize| {
            if !blocked[n] && !region[n] {
                region[n] = true;
                queue.push_back(n);
            }
        };
        if x > 0 {
            push(idx - 1);
        }
        if x + 1 < w {
            push(idx + 1);
        }
        if y > 0 {
            push(idx - w);
        }
        if y + 1 < h {
            push(idx + w);
        }
    }
    Flood {
        region,
        reached_frame,
        size,
    }
}

/// Moore-neighbor tracing of the outer contour of `region` (8-connected
/// cycle of region pixels).
fn trace_outer_contour(region: &[bool], w: usize, h: usize) -> Vec<(u32, u32)> {
    // Clockwise 8-neighborhood starting east.
    const DIRS: [(i64, i64); 8] = [
        (1, 0),
        (1, 1),
        (0, 1),
        (-1, 1),
        (-1, 0),
        (-1, -1),
        (0, -1),
        (1, -1),
    ];
    let at = |x: i64, y: i64| -> bool {
        x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && region[y as usize * w + x as usize]
    };
    let mut start = None;
    'scan: for y in 0..h {
        for x in 0..w {
            if region[y * w + x] {
                start = Some((x as i64, y as i64));
                break 'scan;
            }
        }
    }
    let Some(start) = start else {
        return Vec::new();
    };
    let mut contour = vec![(start.0 as u32, start.1 as u32)];
    // Backtrack starts west of the topmost-leftmost pixel (outside).
    let mut cur = start;
    let mut dir_from = 4usize; // index of direction pointing at the backtrack (west)
    let first_move: Option<(i64, i64, usize)> = {
        let mut found = None;
        for s in 1..=8 {
            let d = (dir_from + s) % 8;
            let (nx, ny) = (cur.0 + DIRS[d].0, cur.1 + DIRS[d].1);
            if at(nx, ny) {
                found = Some((nx, ny, d));
                break;
            }
        }
        found
    };
    let Some((mut nx, mut ny, mut entry_dir)) = first_move else {
        return contour; // isolated pixel
    };
    let stop = (cur, entry_dir);
    let cap = 8 * w * h;
    let mut steps = 0;
    loop {
        cur = (nx, ny);
        contour.push((cur.0 as u32, cur.1 as u32));
        dir_from = (entry_dir + 4) % 8; // look back toward where we came from
        let mut advanced = false;
        for s in 1..=8 {
            let d = (dir_from + s) % 8;
            let (cx, cy) = (cur.0 + DIRS[d].0, cur.1 + DIRS[d].1);
            if at(cx, cy) {
                nx = cx;
                ny = cy;
                entry_dir = d;
                advanced = true;
                break;
            }
        }
        steps += 1;
        if !advanced || steps > cap {
            break;
        }
        if (cur, entry_dir) == stop {
            contour.pop(); // the closing revisit duplicates the start
            break;
        }
    }
    contour
}

/// Sweeps the radius classes and reports nested separation evidence.
///
/// Errors with `DegenerateGrid` when every pixel carries the same verdict.
pub fn nested_rings(
    grid: &GridSpec,
    classes: &[OrbitClass],
    origin_index: (u32, u32),
) -> Result<RingReport> {
    let (w, h) = (grid.px_w as usize, grid.px_h as usize);
    assert_eq!(classes.len(), w * h);
    let first = class_to_byte(classes[0]);
    if classes.iter().all(|&c| class_to_byte(c) == first) {
        return Err(Error::DegenerateGrid);
    }
    let origin = origin_index.1 as usize * w + origin_index.0 as usize;
    assert!(origin < w * h, "origin index outside the grid");

    let fast: Vec<bool> = classes
        .iter()
        .map(|&c| c == OrbitClass::FastEscaping)
        .collect();
    let moduli: Vec<f64> = (0..w * h)
        .map(|idx| grid.pixel_center((idx % w) as u32, (idx / w) as u32).norm())
        .collect();
    let r_max = moduli.iter().cloned().fold(0.0f64, f64::max);

    let sweeps: Vec<Option<Flood>> = (1..=RADIUS_CLASSES)
        .into_par_iter()
        .map(|c| {
            let r = r_max * c as f64 / RADIUS_CLASSES as f64;
            let blocked: Vec<bool> = fast
                .iter()
                .zip(&moduli)
                .map(|(&f, &m)| f && m <= r)
                .collect();
            let flood = flood_fill(&blocked, w, h, origin);
            (flood.size > 0 && !flood.reached_frame).then_some(flood)
        })
        .collect();

    let nested_count = sweeps.iter().filter(|s| s.is_some()).count();

    // Representative loops: one per distinct separated region, innermost
    // first, pairwise disjoint, individually re-verified as separators.
    let mut loops: Vec<Vec<(u32, u32)>> = Vec::new();
    let mut seen_sizes: Vec<usize> = Vec::new();
    let mut regions: Vec<&Flood> = sweeps.iter().flatten().collect();
    regions.sort_by_key(|f| f.size);
    for flood in regions {
        if seen_sizes.contains(&flood.size) {
            continue; // same region rediscovered at a larger radius class
        }
        seen_sizes.push(flood.size);
        let contour = trace_outer_contour(&flood.region, w, h);
        if contour.len() < 4 {
            continue;
        }
        // Verify separation by the loop pixels alone.
        let mut blocked = vec![false; w * h];
        for &(x, y) in &contour {
            blocked[y as usize * w + x as usize] = true;
        }
        let check = flood_fill(&blocked, w, h, origin);
        if check.size == 0 || check.reached_frame {
            continue;
        }
        let disjoint = loops.iter().all(|l| {
            l.iter()
                .all(|p| !contour.contains(p))
        });
        if disjoint {
            loops.push(contour);
        }
    }

    Ok(RingReport {
        rings: loops,
        nested_count,
    })
}

/// True when fast-escaping pixels form a 4-connected chain from the left to
/// the right edge of the mask.
pub fn fast_spans_left_right(fast: &[bool], w: usize, h: usize) -> bool {
    assert_eq!(fast.len(), w * h);
    let mut visited = vec![false; w * h];
    let mut queue = VecDeque::new();
    for y in 0..h {
        let idx = y * w;
        if fast[idx] {
            visited[idx] = true;
            queue.push_back(idx);
        }
    }
    while let Some(idx) = queue.pop_front() {
        let (x, y) = (idx % w, idx / w);
        if x == w - 1 {
            return true;
        }
        let mut push = |n: usize| {
            if fast[n] && !visited[n] {
                visited[n] = true;
                queue.push_back(n);
            }
        };
        if x > 0 {
            push(idx - 1);
        }
        if x + 1 < w {
            push(idx + 1);
        }
        if y > 0 {
            push(idx - w);
        }
        if y + 1 < h {
            push(idx + w);
        }
    }
    false
}

/// Numerical evidence for an unbounded curve crossing the horizontal band of
/// index `k` within the window covered by `grid`: classifies the window and
/// tests whether fast-escaping pixels chain from its left to its right edge.
/// Evidence, not proof.
pub fn has_strip_crossing(
    params: &FamilyParams,
    band_k: i64,
    grid: &GridSpec,
    budget: usize,
) -> Result<bool> {
    debug_assert!({
        use crate::geometry::in_horizontal_band;
        let corners = [
            grid.pixel_center(0, 0),
            grid.pixel_center(grid.px_w - 1, grid.px_h - 1),
        ];
        corners
            .iter()
            .all(|z| in_horizontal_band(band_k, *z) && z.re > 0.0)
    });
    let escape_radius = crate::maxmod::find_escape_radius(params)?;
    let ladder = maxmod_ladder(params, escape_radius, 32)?;
    let (classes, _) = classify_grid(params, grid, budget, escape_radius, &ladder, DEFAULT_TILE);
    let fast: Vec<bool> = classes
        .iter()
        .map(|&c| c == OrbitClass::FastEscaping)
        .collect();
    Ok(fast_spans_left_right(
        &fast,
        grid.px_w as usize,
        grid.px_h as usize,
    ))
}
