//! Cell estimation from beacon RSS, plus trilateration and KNN fingerprinting.

use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::channel::{mean_power_mw, mw_to_dbm, path_loss_db, ChannelParams};
use crate::deployment::{distance, Deployment, Position2D, N_CELLS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocalizationError {
    #[error("no samples for anchor {0}")]
    EmptyAnchor(usize),
    #[error("expected {expected} anchors, got {got}")]
    AnchorCount { expected: usize, got: usize },
    #[error("fingerprint map must hold {N_CELLS} entries, got {0}")]
    MapSize(usize),
    #[error("k = {k} outside 1..={max}")]
    InvalidK { k: usize, max: usize },
    #[error(
        "need at least 3 anchors with matching ranges, got {anchors} anchors and {ranges} ranges"
    )]
    TooFewAnchors { anchors: usize, ranges: usize },
    #[error("anchor geometry is singular (collinear anchors)")]
    Singular,
    #[error("no trials")]
    NoTrials,
    #[error("fingerprint csv: {0}")]
    Csv(String),
}

/// Per-anchor received power in dBm, ordered by anchor index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RssVector(pub [f64; N_CELLS]);

impl RssVector {
    /// Euclidean distance in dB space.
    pub fn db_distance(&self, other: &RssVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn offset(&self, db: f64) -> RssVector {
        RssVector(self.0.map(|v| v + db))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FingerprintMap {
    pub entries: Vec<(Position2D, RssVector)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationResult {
    pub cell_index: usize,
    pub score_per_cell: [f64; N_CELLS],
}

/// Mean `|s|^2` of each anchor's beacon samples, in dBm.
pub fn beacon_rss(per_anchor: &[&[Complex64]]) -> Result<RssVector, LocalizationError> {
    if per_anchor.len() != N_CELLS {
        return Err(LocalizationError::AnchorCount {
            expected: N_CELLS,
            got: per_anchor.len(),
        });
    }
    let mut out = [0.0; N_CELLS];
    for (i, s) in per_anchor.iter().enumerate() {
        if s.is_empty() {
            return Err(LocalizationError::EmptyAnchor(i));
        }
        out[i] = mw_to_dbm(mean_power_mw(s));
    }
    Ok(RssVector(out))
}

/// Model-generated map: shadowing-free, noise-free RSS of each candidate.
pub fn expected_fingerprints(
    deployment: &Deployment,
    params: &ChannelParams,
    tx_power_dbm: f64,
) -> FingerprintMap {
    let entries = deployment
        .candidates
        .iter()
        .map(|&c| {
            let rss = std::array::from_fn(|j| {
                tx_power_dbm - path_loss_db(distance(c, deployment.anchors[j]), params)
            });
            (c, RssVector(rss))
        })
        .collect();
    FingerprintMap { entries }
}

/// Picks the candidate whose expected vector is closest in dB space; ties
/// resolve to the lowest index.
pub fn grid_search_localize(
    measured: &RssVector,
    map: &FingerprintMap,
) -> Result<LocalizationResult, LocalizationError> {
    if map.entries.len() != N_CELLS {
        return Err(LocalizationError::MapSize(map.entries.len()));
    }
    let score_per_cell: [f64; N_CELLS] =
        std::array::from_fn(|i| measured.db_distance(&map.entries[i].1));
    let mut cell_index = 0;
    for (i, s) in score_per_cell.iter().enumerate() {
        if *s < score_per_cell[cell_index] {
            cell_index = i;
        }
    }
    Ok(LocalizationResult {
        cell_index,
        score_per_cell,
    })
}

/// Inverts the log-distance model (no clamping).
pub fn rss_to_range(power_dbm: f64, tx_power_dbm: f64, params: &ChannelParams) -> f64 {
    params.reference_distance_m
        * 10f64.powf(
            (tx_power_dbm - power_dbm - params.reference_loss_db)
                / (10.0 * params.path_loss_exponent),
        )
}

/// Least-squares intersection of range circles, minimizing
/// `sum (|p - a_i| - r_i)^2`.
///
/// The linearized system (first circle equation subtracted from the others)
/// gives the starting point; Gauss-Newton iterations then refine it on the
/// range residuals.
pub fn trilaterate(
    anchors: &[Position2D],
    ranges: &[f64],
) -> Result<Position2D, LocalizationError> {
    let start = trilaterate_linear(anchors, ranges)?;
    Ok(refine_ranges(anchors, ranges, start))
}

fn range_cost(anchors: &[Position2D], ranges: &[f64], p: Position2D) -> f64 {
    anchors
        .iter()
        .zip(ranges)
        .map(|(a, r)| (distance(p, *a) - r).powi(2))
        .sum()
}

fn refine_ranges(anchors: &[Position2D], ranges: &[f64], start: Position2D) -> Position2D {
    let mut p = start;
    let mut cost = range_cost(anchors, ranges, p);
    for _ in 0..100 {
        let (mut h11, mut h12, mut h22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (a, r) in anchors.iter().zip(ranges) {
            let d = distance(p, *a);
            if d == 0.0 {
                continue;
            }
            let (jx, jy) = ((p.x - a.x) / d, (p.y - a.y) / d);
            let e = d - r;
            h11 += jx * jx;
            h12 += jx * jy;
            h22 += jy * jy;
            g1 += jx * e;
            g2 += jy * e;
        }
        let det = h11 * h22 - h12 * h12;
        if !(det.abs() > 1e-15) {
            break;
        }
        let dx = (h22 * g1 - h12 * g2) / det;
        let dy = (h11 * g2 - h12 * g1) / det;
        // halve the step until the cost stops increasing
        let mut step = 1.0;
        let mut next = p;
        let mut next_cost = f64::INFINITY;
        while step > 1e-6 {
            next = Position2D::new(p.x - step * dx, p.y - step * dy);
            next_cost = range_cost(anchors, ranges, next);
            if next_cost <= cost {
                break;
            }
            step *= 0.5;
        }
        if next_cost > cost {
            break;
        }
        let moved = distance(p, next);
        p = next;
        cost = next_cost;
        if moved < 1e-12 {
            break;
        }
    }
    p
}

/// Subtracting the first circle equation from the others removes the
/// quadratic terms and leaves a linear system.
fn trilaterate_linear(
    anchors: &[Position2D],
    ranges: &[f64],
) -> Result<Position2D, LocalizationError> {
    if anchors.len() < 3 || anchors.len() != ranges.len() {
        return Err(LocalizationError::TooFewAnchors {
            anchors: anchors.len(),
            ranges: ranges.len(),
        });
    }
    let (p0, r0) = (anchors[0], ranges[0]);
    let k0 = p0.x * p0.x + p0.y * p0.y;
    // normal equations of A x = b
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut scale = 0.0f64;
    for (p, r) in anchors.iter().zip(ranges).skip(1) {
        let ax = 2.0 * (p.x - p0.x);
        let ay = 2.0 * (p.y - p0.y);
        let b = r0 * r0 - r * r + (p.x * p.x + p.y * p.y) - k0;
        a11 += ax * ax;
        a12 += ax * ay;
        a22 += ay * ay;
        b1 += ax * b;
        b2 += ay * b;
        scale = scale.max(ax.abs()).max(ay.abs());
    }
    let det = a11 * a22 - a12 * a12;
    if det.abs() <= 1e-12 * scale.powi(4).max(f64::MIN_POSITIVE) {
        return Err(LocalizationError::Singular);
    }
    Ok(Position2D::new(
        (a22 * b1 - a12 * b2) / det,
        (a11 * b2 - a12 * b1) / det,
    ))
}

/// Mean (or inverse-distance weighted mean) position of the k nearest
/// fingerprints in dB space. An exact match returns that entry's position.
pub fn knn_fingerprint(
    measured: &RssVector,
    map: &FingerprintMap,
    k: usize,
    weighted: bool,
) -> Result<Position2D, LocalizationError> {
    if k == 0 || k > map.entries.len() {
        return Err(LocalizationError::InvalidK {
            k,
            max: map.entries.len(),
        });
    }
    let mut ranked: Vec<(f64, Position2D)> = map
        .entries
        .iter()
        .map(|(p, v)| (measured.db_distance(v), *p))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let nearest = &ranked[..k];
    if weighted {
        if let Some((_, p)) = nearest.iter().find(|(d, _)| *d == 0.0) {
            return Ok(*p);
        }
        let w: Vec<f64> = nearest.iter().map(|(d, _)| d.recip()).collect();
        let total: f64 = w.iter().sum();
        let (x, y) = nearest
            .iter()
            .zip(&w)
            .fold((0.0, 0.0), |(x, y), ((_, p), wi)| {
                (x + wi * p.x, y + wi * p.y)
            });
        Ok(Position2D::new(x / total, y / total))
    } else {
        let n = k as f64;
        let (x, y) = nearest
            .iter()
            .fold((0.0, 0.0), |(x, y), (_, p)| (x + p.x, y + p.y));
        Ok(Position2D::new(x / n, y / n))
    }
}

pub fn probability_of_localization(trials: &[(usize, usize)]) -> Result<f64, LocalizationError> {
    if trials.is_empty() {
        return Err(LocalizationError::NoTrials);
    }
    let hits = trials.iter().filter(|(t, e)| t == e).count();
    Ok(hits as f64 / trials.len() as f64)
}

impl FingerprintMap {
    /// CSV with header `cell,x,y,rss_0,...,rss_5`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell,x,y");
        for j in 0..N_CELLS {
            write!(out, ",rss_{j}").unwrap();
        }
        out.push('\n');
        for (i, (p, v)) in self.entries.iter().enumerate() {
            write!(out, "{i},{},{}", p.x, p.y).unwrap();
            for r in v.0 {
                write!(out, ",{r}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, LocalizationError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| LocalizationError::Csv("empty input".into()))?;
        let expected: Vec<String> = ["cell", "x", "y"]
            .iter()
            .map(|s| s.to_string())
            .chain((0..N_CELLS).map(|j| format!("rss_{j}")))
            .collect();
        let got: Vec<&str> = header.split(',').map(str::trim).collect();
        if got != expected {
            return Err(LocalizationError::Csv(format!(
                "unexpected header `{header}`"
            )));
        }
        let mut entries = Vec::new();
        for (n, line) in lines.enumerate() {
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| LocalizationError::Csv(format!("row {}: {e}", n + 1)))?;
            if fields.len() != 3 + N_CELLS {
                return Err(LocalizationError::Csv(format!(
                    "row {}: wrong column count",
                    n + 1
                )));
            }
            entries.push((
                Position2D::new(fields[1], fields[2]),
                RssVector(std::array::from_fn(|j| fields[3 + j])),
            ));
        }
        if entries.is_empty() {
            return Err(LocalizationError::Csv("no rows".into()));
        }
        Ok(Self { entries })
    }
}
