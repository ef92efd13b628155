//! PSK / APSK symbol alphabets with the geometry metadata the precoder needs.
//!
//! Two families are supported:
//!
//! * **M-PSK** — `M` unit-modulus points. They are placed at angles
//!   `pi/M + 2*pi*j/M`, i.e. offset by half a sector, so that no point sits
//!   on the real or imaginary axis. The precoder extracts per-component
//!   signs `Re(s)/|Re(s)|`; an axis-aligned point would make that 0/0.
//!   For M = 4 this is the familiar diagonal QPSK at `(±1 ± i)/sqrt(2)`.
//! * **16-APSK** — the 4+12 dual-ring layout with a configurable ring
//!   ratio, scaled so the *average* symbol energy is one (a multi-ring
//!   alphabet cannot have unit energy per symbol).
//!
//! `theta0` is the detection-sector half-angle used by the region
//! corrections: `pi/M` for M-PSK, `pi/12` for the 16-APSK top ring.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SlpError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstellationKind {
    Mpsk,
    Mapsk,
}

/// A normalized symbol alphabet plus the geometry the precoder relies on.
#[derive(Debug, Clone)]
pub struct Constellation {
    kind: ConstellationKind,
    order: usize,
    points: Vec<Complex64>,
    ring_radii: Vec<f64>,
    /// Ring index of each point (0 = innermost).
    rings: Vec<usize>,
    theta0: f64,
    top_ring_power: f64,
}

/// Default ring ratio for [`make_mapsk16`], matching the DVB-S2 4+12 layout.
pub const DEFAULT_RING_RATIO: f64 = 2.7;

/// Uniform M-PSK, axis-offset by half a sector.
pub fn make_mpsk(order: usize) -> Result<Constellation> {
    if order < 4 || !order.is_power_of_two() {
        return Err(SlpError::InvalidOrder { order });
    }
    let m = order as f64;
    let points = (0..order)
        .map(|j| Complex64::from_polar(1.0, PI / m + 2.0 * PI * j as f64 / m))
        .collect();
    Ok(Constellation {
        kind: ConstellationKind::Mpsk,
        order,
        points,
        ring_radii: vec![1.0],
        rings: vec![0; order],
        theta0: PI / m,
        top_ring_power: 1.0,
    })
}

/// 16-APSK with 4 inner and 12 outer points.
///
/// `ring_ratio` is the outer/inner radius ratio. Radii are scaled so the
/// average symbol energy is one: with `r2 = ratio * r1`,
/// `(4 r1^2 + 12 r2^2) / 16 = 1` gives `r1 = 2 / sqrt(1 + 3 ratio^2)`.
pub fn make_mapsk16(ring_ratio: f64) -> Result<Constellation> {
    if !ring_ratio.is_finite() || ring_ratio <= 1.0 {
        return Err(SlpError::InvalidGeometry { ring_ratio });
    }
    let r1 = 2.0 / (1.0 + 3.0 * ring_ratio * ring_ratio).sqrt();
    let r2 = ring_ratio * r1;

    let mut points = Vec::with_capacity(16);
    let mut rings = Vec::with_capacity(16);
    for k in 0..4 {
        points.push(Complex64::from_polar(r1, PI / 4.0 + k as f64 * FRAC_PI_2));
        rings.push(0);
    }
    for k in 0..12 {
        points.push(Complex64::from_polar(r2, PI / 12.0 + k as f64 * PI / 6.0));
        rings.push(1);
    }
    Ok(Constellation {
        kind: ConstellationKind::Mapsk,
        order: 16,
        points,
        ring_radii: vec![r1, r2],
        rings,
        theta0: PI / 12.0,
        top_ring_power: r2 * r2,
    })
}

impl Constellation {
    /// Builds a constellation from its CLI token: `qpsk`, `8psk` or `16apsk`.
    pub fn from_token(token: &str, ring_ratio: f64) -> Result<Constellation> {
        match token {
            "qpsk" => make_mpsk(4),
            "8psk" => make_mpsk(8),
            "16apsk" => make_mapsk16(ring_ratio),
            _ => Err(SlpError::UnknownModulation {
                token: token.to_string(),
            }),
        }
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn ring_radii(&self) -> &[f64] {
        &self.ring_radii
    }

    /// Detection-sector half-angle: `pi/M` for M-PSK, `pi/12` for the
    /// 16-APSK top ring.
    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    /// Squared modulus of the outermost ring (`1.0` for PSK).
    pub fn top_ring_power(&self) -> f64 {
        self.top_ring_power
    }

    pub fn ring_index(&self, point_index: usize) -> usize {
        self.rings[point_index]
    }

    pub fn is_top_ring(&self, point_index: usize) -> bool {
        self.rings[point_index] == self.ring_radii.len() - 1
    }

    /// Average symbol energy; one by construction.
    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order as f64
    }

    /// Minimum-distance decision on an amplitude-normalized observation:
    /// nearest angle for PSK, nearest ring then nearest in-ring angle for
    /// APSK. Returns the decoded point index.
    pub fn detect(&self, y: Complex64) -> usize {
        let angle = y.arg();
        let ring = match self.kind {
            ConstellationKind::Mpsk => 0,
            ConstellationKind::Mapsk => {
                let r = y.norm();
                let mut best = 0;
                let mut best_gap = f64::INFINITY;
                for (i, &radius) in self.ring_radii.iter().enumerate() {
                    let gap = (r - radius).abs();
                    if gap < best_gap {
                        best_gap = gap;
                        best = i;
                    }
                }
                best
            }
        };
        let mut best = 0;
        let mut best_gap = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            if self.rings[i] != ring {
                continue;
            }
            let gap = wrap_angle(angle - p.arg()).abs();
            if gap < best_gap {
                best_gap = gap;
                best = i;
            }
        }
        best
    }
}

/// Wraps an angle to `(-pi, pi]`.
pub(crate) fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// A slot's worth of intended symbols, one per receive antenna.
#[derive(Debug, Clone)]
pub struct SymbolVector {
    entries: Vec<Complex64>,
    source_indices: Vec<usize>,
}

impl SymbolVector {
    /// Builds a symbol vector from constellation point indices.
    pub fn from_indices(c: &Constellation, indices: Vec<usize>) -> Result<SymbolVector> {
        for &i in &indices {
            if i >= c.order() {
                return Err(SlpError::InvalidInput(format!(
                    "symbol index {i} out of range for order-{} constellation",
                    c.order()
                )));
            }
        }
        let entries = indices.iter().map(|&i| c.points()[i]).collect();
        Ok(SymbolVector {
            entries,
            source_indices: indices,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn source_indices(&self) -> &[usize] {
        &self.source_indices
    }
}

/// Draws `n` i.i.d. uniform symbols; reproducible under a fixed seed.
pub fn draw_symbols(c: &Constellation, n: usize, rng_seed: u64) -> SymbolVector {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let indices: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c.order())).collect();
    SymbolVector::from_indices(c, indices).expect("indices drawn in range")
}
