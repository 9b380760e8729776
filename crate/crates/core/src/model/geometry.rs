use serde::{Deserialize, Serialize};

use super::FluxRational;
use crate::{Error, Result};

/// Lattice site `(x1, x2)`.
pub type Site = [i64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Open,
    MagneticPeriodic,
}

/// Rectangular `Lx × Ly` sample. Sites are numbered `x1 * Ly + x2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeGeometry {
    lx: usize,
    ly: usize,
    boundary: Boundary,
}

impl LatticeGeometry {
    pub fn new(lx: usize, ly: usize, boundary: Boundary) -> Result<Self> {
        if lx < 2 || ly < 2 {
            return Err(Error::Geometry(format!("sample {lx}x{ly} is smaller than 2x2")));
        }
        Ok(Self { lx, ly, boundary })
    }

    pub fn open(lx: usize, ly: usize) -> Result<Self> {
        Self::new(lx, ly, Boundary::Open)
    }

    pub fn torus(lx: usize, ly: usize) -> Result<Self> {
        Self::new(lx, ly, Boundary::MagneticPeriodic)
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::MagneticPeriodic
    }

    pub fn n_sites(&self) -> usize {
        self.lx * self.ly
    }

    /// Torus construction requires `q | Lx`, which makes the total flux
    /// `α Lx Ly` an integer and the Landau-gauge phases periodic.
    pub fn check_flux(&self, flux: &FluxRational) -> Result<()> {
        if self.is_periodic() && self.lx as i64 % flux.q() != 0 {
            return Err(Error::Geometry(format!(
                "flux {}/{} is incompatible with a magnetic-periodic torus of width {} (q must divide Lx)",
                flux.p(),
                flux.q(),
                self.lx
            )));
        }
        Ok(())
    }

    /// Row index of a site; wraps on the torus, `None` outside an open sample.
    pub fn index(&self, s: Site) -> Option<usize> {
        let (lx, ly) = (self.lx as i64, self.ly as i64);
        let (x1, x2) = if self.is_periodic() {
            (s[0].rem_euclid(lx), s[1].rem_euclid(ly))
        } else if (0..lx).contains(&s[0]) && (0..ly).contains(&s[1]) {
            (s[0], s[1])
        } else {
            return None;
        };
        Some((x1 * ly + x2) as usize)
    }

    pub fn site(&self, index: usize) -> Site {
        [(index / self.ly) as i64, (index % self.ly) as i64]
    }

    pub fn center(&self) -> Site {
        [(self.lx / 2) as i64, (self.ly / 2) as i64]
    }

    /// Displacement `to - from`, reduced to the minimal image on the torus.
    pub fn displacement(&self, from: Site, to: Site) -> [i64; 2] {
        let mut d = [to[0] - from[0], to[1] - from[1]];
        if self.is_periodic() {
            for (k, l) in [(0, self.lx as i64), (1, self.ly as i64)] {
                d[k] = d[k].rem_euclid(l);
                if 2 * d[k] > l {
                    d[k] -= l;
                }
            }
        }
        d
    }

    /// Lattice distance to the nearest edge; unbounded on the torus.
    pub fn boundary_distance(&self, s: Site) -> i64 {
        if self.is_periodic() {
            return i64::MAX;
        }
        let (lx, ly) = (self.lx as i64, self.ly as i64);
        s[0].min(lx - 1 - s[0]).min(s[1]).min(ly - 1 - s[1])
    }
}

/// Disc of sites over which per-site traces are averaged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceWindow {
    pub center: Site,
    pub radius: usize,
    pub margin: usize,
}

impl TraceWindow {
    pub fn new(center: Site, radius: usize, margin: usize) -> Result<Self> {
        if radius == 0 || margin == 0 {
            return Err(Error::Geometry("trace window radius and margin must be positive".into()));
        }
        Ok(Self { center, radius, margin })
    }

    /// Window at the sample center with the default margin `Lx/4`.
    pub fn centered(geom: &LatticeGeometry, radius: usize) -> Result<Self> {
        Self::new(geom.center(), radius, (geom.lx() / 4).max(1))
    }

    /// Row indices of the sites within Euclidean distance `radius` of the
    /// center, in increasing order.
    pub fn sites(&self, geom: &LatticeGeometry) -> Vec<usize> {
        let r2 = (self.radius * self.radius) as i64;
        (0..geom.n_sites())
            .filter(|&i| {
                let d = geom.displacement(self.center, geom.site(i));
                d[0] * d[0] + d[1] * d[1] <= r2
            })
            .collect()
    }

    /// Every window site must keep at least `margin` sites to the edge.
    pub fn validate(&self, geom: &LatticeGeometry) -> Result<()> {
        if geom.index(self.center).is_none() {
            return Err(Error::Geometry(format!("window center {:?} outside the sample", self.center)));
        }
        if geom.is_periodic() {
            let half = geom.lx().min(geom.ly()) / 2;
            if self.radius >= half.max(1) {
                return Err(Error::Geometry(format!(
                    "window radius {} does not fit on a {}x{} torus",
                    self.radius,
                    geom.lx(),
                    geom.ly()
                )));
            }
            return Ok(());
        }
        let closest = self
            .sites(geom)
            .into_iter()
            .map(|i| geom.boundary_distance(geom.site(i)))
            .min()
            .unwrap_or(0);
        if closest < self.margin as i64 {
            return Err(Error::Geometry(format!(
                "window of radius {} at {:?} comes within {} sites of the boundary (margin {})",
                self.radius, self.center, closest, self.margin
            )));
        }
        Ok(())
    }
}
