//! Bounded Voronoi diagrams and the candidate-location set.
//!
//! Each cell is built by clipping the domain rectangle with the bisector
//! half-plane of every other site. That is O(n²) per diagram, which is
//! plenty for station sets of a few dozen sites, and it produces exact
//! convex cells with the clipping corners included as vertices.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::geo::{distance, CoordinateMode, Domain, Point};

/// Sites closer than this are merged before the diagram is built.
pub const SITE_MERGE_TOL: f64 = 1e-9;
/// Vertices closer than this are reported once.
pub const VERTEX_DEDUP_TOL: f64 = 1e-6;
/// Default exclusion radius around existing sites for candidates, km.
pub const DEFAULT_MIN_SEPARATION_KM: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VoronoiError {
    #[error("a Voronoi diagram needs at least one site")]
    NoSites,
    #[error("site {index} at ({x}, {y}) lies outside the domain")]
    SiteOutsideDomain { index: usize, x: f64, y: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoronoiDiagram {
    pub domain: Domain,
    /// Sites after merging duplicates, in first-seen order.
    pub sites: Vec<Point>,
    /// Counter-clockwise convex cell of each site, clipped to the domain.
    pub regions: Vec<Vec<Point>>,
    /// Deduplicated union of all cell vertices.
    pub vertices: Vec<Point>,
}

pub fn compute_diagram(sites: &[Point], domain: Domain) -> Result<VoronoiDiagram, VoronoiError> {
    if sites.is_empty() {
        return Err(VoronoiError::NoSites);
    }
    let mut merged: Vec<Point> = Vec::with_capacity(sites.len());
    for (index, s) in sites.iter().enumerate() {
        if !s.is_finite() || !domain.contains(*s) {
            return Err(VoronoiError::SiteOutsideDomain { index, x: s.x, y: s.y });
        }
        if !merged.iter().any(|m| m.euclidean(s) <= SITE_MERGE_TOL) {
            merged.push(*s);
        }
    }

    let scale = domain.width().max(domain.height());
    let mut regions = Vec::with_capacity(merged.len());
    for (i, si) in merged.iter().enumerate() {
        let mut cell: Vec<Point> = domain.corners().to_vec();
        for (j, sj) in merged.iter().enumerate() {
            if i == j || cell.is_empty() {
                continue;
            }
            cell = clip_to_bisector(&cell, *si, *sj, scale);
        }
        regions.push(cell);
    }

    let mut vertices: Vec<Point> = Vec::new();
    for cell in &regions {
        for v in cell {
            if !vertices.iter().any(|u| u.euclidean(v) <= VERTEX_DEDUP_TOL) {
                vertices.push(*v);
            }
        }
    }

    Ok(VoronoiDiagram {
        domain,
        sites: merged,
        regions,
        vertices,
    })
}

/// Keeps the part of convex polygon `poly` that is at least as close to
/// `site` as to `other`.
fn clip_to_bisector(poly: &[Point], site: Point, other: Point, scale: f64) -> Vec<Point> {
    let ax = other.x - site.x;
    let ay = other.y - site.y;
    let half = (ax * ax + ay * ay) / 2.0;
    // Signed offset of p from the bisector, positive on `other`'s side.
    let side = |p: &Point| ax * (p.x - site.x) + ay * (p.y - site.y) - half;
    let norm = crate::math::sqrt(ax * ax + ay * ay);
    let eps = 1e-12 * scale * if norm > 0.0 { norm } else { 1.0 };

    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let p = poly[k];
        let q = poly[(k + 1) % poly.len()];
        let (fp, fq) = (side(&p), side(&q));
        let p_in = fp <= eps;
        if p_in {
            out.push(p);
        }
        // A proper crossing; an endpoint lying on the bisector is kept as is.
        if p_in != (fq <= eps) && fp.abs() > eps && fq.abs() > eps {
            out.push(p.lerp(&q, fp / (fp - fq)));
        }
    }
    dedup_ring(out)
}

fn dedup_ring(mut ring: Vec<Point>) -> Vec<Point> {
    ring.dedup_by(|a, b| a.euclidean(b) <= SITE_MERGE_TOL);
    while ring.len() > 1 && ring[0].euclidean(ring.last().unwrap()) <= SITE_MERGE_TOL {
        ring.pop();
    }
    ring
}

/// Candidate locations: diagram vertices that are not within
/// `min_separation` of any existing site, sorted by `x` then `y`.
pub fn candidate_vertices(
    diagram: &VoronoiDiagram,
    existing: &[Point],
    min_separation: f64,
    mode: CoordinateMode,
) -> Vec<Point> {
    let mut out: Vec<Point> = diagram
        .vertices
        .iter()
        .copied()
        .filter(|v| existing.iter().all(|s| distance(*v, *s, mode) >= min_separation))
        .collect();
    out.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    out
}

/// Convenience: diagram plus candidates for a station set.
pub fn candidates_for(
    sites: &[Point],
    domain: Domain,
    min_separation: f64,
    mode: CoordinateMode,
) -> Result<Vec<Point>, VoronoiError> {
    let diagram = compute_diagram(sites, domain)?;
    Ok(candidate_vertices(&diagram, sites, min_separation, mode))
}

/// True when `p` lies inside the counter-clockwise convex polygon, allowing
/// `tol` of slack across its edges.
pub fn polygon_contains(poly: &[Point], p: Point, tol: f64) -> bool {
    if poly.len() < 3 {
        return false;
    }
    (0..poly.len()).all(|k| {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let len = a.euclidean(&b);
        if len == 0.0 {
            return true;
        }
        let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        cross / len >= -tol
    })
}

/// Signed area (positive for counter-clockwise rings).
pub fn polygon_area(poly: &[Point]) -> f64 {
    let mut s = 0.0;
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        s += a.x * b.y - b.x * a.y;
    }
    s / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::Rng;

    fn square() -> Domain {
        Domain::new(0.0, 0.0, 10.0, 10.0)
    }

    fn has_vertex(vs: &[Point], p: Point) -> bool {
        vs.iter().any(|v| v.euclidean(&p) < 1e-9)
    }

    #[test]
    fn empty_sites_rejected() {
        assert_eq!(compute_diagram(&[], square()), Err(VoronoiError::NoSites));
    }

    #[test]
    fn single_site_region_is_the_domain() {
        let d = compute_diagram(&[Point::new(5.0, 5.0)], square()).unwrap();
        assert_eq!(d.regions.len(), 1);
        assert_eq!(d.regions[0], square().corners().to_vec());
        let c = candidate_vertices(&d, &d.sites, DEFAULT_MIN_SEPARATION_KM, CoordinateMode::Planar);
        assert_eq!(
            c,
            vec![Point::new(0.0, 0.0), Point::new(0.0, 10.0), Point::new(10.0, 0.0), Point::new(10.0, 10.0)]
        );
    }

    #[test]
    fn two_symmetric_sites_split_on_the_bisector() {
        let d = compute_diagram(&[Point::new(3.0, 5.0), Point::new(7.0, 5.0)], square()).unwrap();
        assert!(has_vertex(&d.vertices, Point::new(5.0, 0.0)));
        assert!(has_vertex(&d.vertices, Point::new(5.0, 10.0)));
        assert_eq!(d.vertices.len(), 6);
        assert!((polygon_area(&d.regions[0]) - 50.0).abs() < 1e-9);
    }

    #[test]
    fn square_of_sites_shares_the_center() {
        let sites = [Point::new(3.0, 3.0), Point::new(7.0, 3.0), Point::new(7.0, 7.0), Point::new(3.0, 7.0)];
        let d = compute_diagram(&sites, square()).unwrap();
        for cell in &d.regions {
            assert!(has_vertex(cell, Point::new(5.0, 5.0)));
        }
    }

    #[test]
    fn equilateral_triangle_yields_circumcenter() {
        let h = 3.0f64.sqrt();
        let sites = [Point::new(4.0, 4.0), Point::new(6.0, 4.0), Point::new(5.0, 4.0 + h)];
        let d = compute_diagram(&sites, Domain::new(-50.0, -50.0, 50.0, 50.0)).unwrap();
        let cand = candidate_vertices(&d, &d.sites, 0.05, CoordinateMode::Planar);
        let circ = Point::new(5.0, 4.0 + h / 3.0);
        assert!(cand.iter().any(|v| v.euclidean(&circ) < 1e-9));
    }

    #[test]
    fn duplicate_sites_are_merged() {
        let d = compute_diagram(&[Point::new(5.0, 5.0), Point::new(5.0, 5.0)], square()).unwrap();
        assert_eq!(d.sites.len(), 1);
    }

    #[test]
    fn collinear_sites_need_no_perturbation() {
        let sites: Vec<Point> = (1..=4).map(|i| Point::new(2.0 * i as f64, 5.0)).collect();
        let d = compute_diagram(&sites, square()).unwrap();
        let total: f64 = d.regions.iter().map(|r| polygon_area(r)).sum();
        assert!((total - 100.0).abs() < 1e-9);
    }

    #[test]
    fn min_separation_filters_vertices_near_sites() {
        // A site at a corner makes that corner a vertex at distance 0.
        let d = compute_diagram(&[Point::new(0.0, 0.0)], square()).unwrap();
        let c = candidate_vertices(&d, &d.sites, 0.05, CoordinateMode::Planar);
        assert_eq!(c.len(), 3);
        assert!(!has_vertex(&c, Point::new(0.0, 0.0)));
    }

    #[test]
    fn cells_are_convex_and_partition_the_domain() {
        let mut rng = crate::rng::stream(11, crate::rng::Stream::Placement);
        for _ in 0..20 {
            let n = rng.gen_range(1..=25);
            let sites: Vec<Point> = (0..n)
                .map(|_| Point::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)))
                .collect();
            let d = compute_diagram(&sites, square()).unwrap();
            let total: f64 = d.regions.iter().map(|r| polygon_area(r)).sum();
            assert!((total - 100.0).abs() < 1e-7, "area {total}");
            for cell in &d.regions {
                assert!(polygon_area(cell) >= 0.0);
                for v in cell {
                    assert!(square().contains(*v));
                }
            }
        }
    }
}
