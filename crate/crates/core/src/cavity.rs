//! Multi-traversal bifurcation of a weighted chief-ray ensemble inside a
//! two-mirror cavity.
//!
//! Geometry (unfolded frame, mirrors act as thin lenses):
//!
//! ```text
//!   M1 (A) --gap-- B ====field==== C --gap-- M2 (D) --detector_distance-- E
//! ```
//!
//! Every field passage splits each beam into two branches of half weight; the
//! branch keeps its kick through all later reflections. Beams that land on
//! numerically identical states are coalesced so the tree does not grow as
//! 2^n when the geometry has degeneracies.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{
    angular_enhance, focusing_matrix, propagation_matrix, split, Branch, Mirror, RayState,
    TransferMatrix,
};

/// Default position tolerance (m) for coalescing: only exact degeneracies merge.
pub const DEFAULT_COALESCE_POSITION: f64 = 1e-12;
/// Default angle tolerance (rad) for coalescing.
pub const DEFAULT_COALESCE_ANGLE: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CavityKind {
    Confocal,
    PlanarConcave,
    ConvexConcave,
}

impl CavityKind {
    pub const ALL: [CavityKind; 3] = [
        CavityKind::Confocal,
        CavityKind::PlanarConcave,
        CavityKind::ConvexConcave,
    ];
}

/// Mirror through which light is sampled towards the detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractionMirror {
    M1,
    M2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// M1 towards M2.
    Forward,
    /// M2 towards M1.
    Backward,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// Optional relay lens between the exit mirror and the detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorLens {
    /// Distance from the exit mirror to the lens (m).
    #[serde(rename = "offset_m")]
    pub offset: f64,
    #[serde(rename = "focal_m")]
    pub focal: f64,
}

/// Cavity geometry and run parameters. The mirrors are authoritative for the
/// optics; `kind` only labels the configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityConfig {
    pub kind: CavityKind,
    pub cavity_length: f64,
    pub field_length: f64,
    /// Field end to mirror, on each side.
    pub gap: f64,
    /// Exit mirror to detector plane E.
    pub detector_distance: f64,
    pub detector_lens: Option<DetectorLens>,
    pub mirror1: Mirror,
    pub mirror2: Mirror,
    pub extraction: ExtractionMirror,
    pub n_traversals: usize,
    pub theta_split: f64,
    /// Whether the field also splits beams travelling M2 -> M1.
    pub split_on_backward: bool,
    pub coalesce_position: f64,
    pub coalesce_angle: f64,
    pub input: RayState,
}

impl CavityConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        for (name, v) in [
            ("cavity_length", self.cavity_length),
            ("field_length", self.field_length),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        for (name, v) in [
            ("gap", self.gap),
            ("detector_distance", self.detector_distance),
            ("coalesce_position", self.coalesce_position),
            ("coalesce_angle", self.coalesce_angle),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        let span = self.field_length + 2.0 * self.gap;
        if (span - self.cavity_length).abs() > 1e-9 * self.cavity_length {
            return bad(format!(
                "field_length + 2*gap = {span} does not match cavity_length = {}",
                self.cavity_length
            ));
        }
        if self.n_traversals == 0 {
            return bad("n_traversals must be >= 1".into());
        }
        if !(self.theta_split >= 0.0) || !self.theta_split.is_finite() {
            return bad(format!(
                "theta_split must be finite and >= 0, got {}",
                self.theta_split
            ));
        }
        for (name, mirror) in [("mirror1", self.mirror1), ("mirror2", self.mirror2)] {
            mirror
                .matrix()
                .map_err(|e| Error::InvalidConfig(format!("{name}: {e}")))?;
        }
        if let Some(lens) = self.detector_lens {
            if !(lens.offset >= 0.0 && lens.offset <= self.detector_distance) {
                return bad(format!(
                    "detector lens offset {} must lie within [0, detector_distance]",
                    lens.offset
                ));
            }
            if lens.focal == 0.0 || lens.focal.is_nan() {
                return bad("detector lens focal length must be non-zero".into());
            }
        }
        RayState::new(self.input.position, self.input.angle)
            .map_err(|e| Error::InvalidConfig(format!("input ray: {e}")))?;
        Ok(())
    }

    pub fn far_mirror(&self, direction: Direction) -> Mirror {
        match direction {
            Direction::Forward => self.mirror2,
            Direction::Backward => self.mirror1,
        }
    }

    fn splits(&self, direction: Direction) -> bool {
        direction == Direction::Forward || self.split_on_backward
    }

    /// Traversal `index` (1-based) ends at an extraction mirror.
    pub fn is_extraction_traversal(&self, index: usize) -> bool {
        match self.extraction {
            // Identical mirrors in the symmetric confocal layout: every
            // traversal ends at an equivalent exit.
            ExtractionMirror::M2 => true,
            ExtractionMirror::M1 => index.is_multiple_of(2),
        }
    }

    /// Exit mirror to detector plane, optional relay lens included.
    pub fn detector_transport(&self) -> Result<TransferMatrix> {
        match self.detector_lens {
            None => propagation_matrix(self.detector_distance),
            Some(lens) => Ok(propagation_matrix(lens.offset)?
                .then(&focusing_matrix(lens.focal)?)
                .then(&propagation_matrix(self.detector_distance - lens.offset)?)),
        }
    }
}

/// Mirror radius of curvature shared by the concave mirrors of all presets (m).
pub const PRESET_MIRROR_RADIUS: f64 = 25.0;

/// Geometry of the reference cavities: 14 m long, 10 m field centred with a
/// 2 m gap each side, detector 2 m past the exit mirror.
pub fn build_preset(kind: CavityKind) -> CavityConfig {
    let cavity_length = 14.0;
    let concave = Mirror::Concave {
        focal: PRESET_MIRROR_RADIUS / 2.0,
    };
    let (mirror1, mirror2, extraction) = match kind {
        CavityKind::Confocal => (concave, concave, ExtractionMirror::M2),
        CavityKind::PlanarConcave => (concave, Mirror::Planar, ExtractionMirror::M1),
        CavityKind::ConvexConcave => (
            concave,
            Mirror::Convex {
                focal: PRESET_MIRROR_RADIUS / 2.0 - cavity_length / 2.0,
            },
            ExtractionMirror::M1,
        ),
    };
    CavityConfig {
        kind,
        cavity_length,
        field_length: 10.0,
        gap: 2.0,
        detector_distance: 2.0,
        detector_lens: None,
        mirror1,
        mirror2,
        extraction,
        n_traversals: 15,
        theta_split: 4e-10,
        split_on_backward: true,
        coalesce_position: DEFAULT_COALESCE_POSITION,
        coalesce_angle: DEFAULT_COALESCE_ANGLE,
        input: RayState::axial(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedBeam {
    pub ray: RayState,
    /// Fraction of the injected power carried by this beam.
    pub weight: f64,
    /// Number of splitting field passages this beam has been through.
    pub generation: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamEnsemble {
    pub beams: Vec<WeightedBeam>,
    pub coalesce_tol_position: f64,
    pub coalesce_tol_angle: f64,
}

impl BeamEnsemble {
    pub fn single(ray: RayState, coalesce_tol_position: f64, coalesce_tol_angle: f64) -> Self {
        BeamEnsemble {
            beams: vec![WeightedBeam {
                ray,
                weight: 1.0,
                generation: 0,
            }],
            coalesce_tol_position,
            coalesce_tol_angle,
        }
    }

    /// The injected beam of `config`.
    pub fn injected(config: &CavityConfig) -> Self {
        Self::single(
            config.input,
            config.coalesce_position,
            config.coalesce_angle,
        )
    }

    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.beams.iter().map(|b| b.weight).sum()
    }

    pub fn mean_position(&self) -> f64 {
        self.weighted_mean(|r| r.position)
    }

    pub fn mean_angle(&self) -> f64 {
        self.weighted_mean(|r| r.angle)
    }

    /// Weighted variance of beam positions about their mean (m²).
    pub fn position_variance(&self) -> f64 {
        let mean = self.mean_position();
        self.weighted_mean(|r| (r.position - mean).powi(2))
    }

    fn weighted_mean(&self, f: impl Fn(&RayState) -> f64) -> f64 {
        let total = self.total_weight();
        self.beams.iter().map(|b| b.weight * f(&b.ray)).sum::<f64>() / total
    }

    /// Apply the same linear element to every beam.
    pub fn transform(&self, m: &TransferMatrix) -> Result<BeamEnsemble> {
        let beams = self
            .beams
            .iter()
            .map(|b| {
                Ok(WeightedBeam {
                    ray: m.apply(b.ray)?,
                    ..*b
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.with_beams(beams))
    }

    fn with_beams(&self, beams: Vec<WeightedBeam>) -> BeamEnsemble {
        BeamEnsemble {
            beams,
            coalesce_tol_position: self.coalesce_tol_position,
            coalesce_tol_angle: self.coalesce_tol_angle,
        }
    }

    /// True when two beams sit within both coalescing tolerances.
    pub fn has_mergeable_pair(&self) -> bool {
        let mut sorted = self.beams.clone();
        sorted.sort_by(cmp_state);
        for (i, b) in sorted.iter().enumerate() {
            for other in &sorted[i + 1..] {
                if other.ray.position - b.ray.position > self.coalesce_tol_position {
                    break;
                }
                if (other.ray.angle - b.ray.angle).abs() <= self.coalesce_tol_angle {
                    return true;
                }
            }
        }
        false
    }
}

fn cmp_state(a: &WeightedBeam, b: &WeightedBeam) -> Ordering {
    a.ray
        .position
        .total_cmp(&b.ray.position)
        .then(a.ray.angle.total_cmp(&b.ray.angle))
}

/// Thin-lens reflection. The beam keeps whatever transverse momentum it has
/// accumulated; only the mirror's own focusing acts on it.
pub fn reflect_and_conserve(ray: RayState, mirror: Mirror) -> Result<RayState> {
    mirror.matrix()?.apply(ray)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct AngleKey(f64);

impl Eq for AngleKey {}

impl PartialOrd for AngleKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AngleKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

struct Cluster {
    anchor: RayState,
    weight: f64,
    sum_position: f64,
    sum_angle: f64,
    identical: bool,
    generation: u32,
}

/// Merge beams that lie within both tolerances of each other.
///
/// Beams are swept in sorted `(position, angle)` order and joined to the
/// first open cluster whose anchor is within tolerance; merged beams sit at
/// the weighted mean state with the summed weight. Sweeps repeat until no
/// pair is left within tolerance.
pub fn coalesce(ensemble: BeamEnsemble) -> BeamEnsemble {
    let mut current = ensemble;
    loop {
        let before = current.len();
        current = coalesce_sweep(current);
        if current.len() == before {
            return current;
        }
    }
}

fn coalesce_sweep(mut ensemble: BeamEnsemble) -> BeamEnsemble {
    let tol_x = ensemble.coalesce_tol_position;
    let tol_a = ensemble.coalesce_tol_angle;
    ensemble.beams.sort_by(cmp_state);

    let mut clusters: Vec<Cluster> = Vec::with_capacity(ensemble.beams.len());
    // clusters[window..] have anchors within tol_x of the current position;
    // `open` indexes exactly those by anchor angle
    let mut window = 0;
    let mut open: BTreeSet<(AngleKey, usize)> = BTreeSet::new();
    for beam in &ensemble.beams {
        let x = beam.ray.position;
        while window < clusters.len() && x - clusters[window].anchor.position > tol_x {
            open.remove(&(AngleKey(clusters[window].anchor.angle), window));
            window += 1;
        }
        let a = beam.ray.angle;
        let target = open
            .range((AngleKey(a - tol_a), 0)..=(AngleKey(a + tol_a), usize::MAX))
            .map(|&(_, i)| i)
            .filter(|&i| (a - clusters[i].anchor.angle).abs() <= tol_a)
            .min();
        match target {
            Some(i) => {
                let c = &mut clusters[i];
                c.identical &= c.anchor == beam.ray;
                c.weight += beam.weight;
                c.sum_position += beam.weight * beam.ray.position;
                c.sum_angle += beam.weight * beam.ray.angle;
                c.generation = c.generation.max(beam.generation);
            }
            None => {
                open.insert((AngleKey(a), clusters.len()));
                clusters.push(Cluster {
                    anchor: beam.ray,
                    weight: beam.weight,
                    sum_position: beam.weight * beam.ray.position,
                    sum_angle: beam.weight * beam.ray.angle,
                    identical: true,
                    generation: beam.generation,
                });
            }
        }
    }

    let beams = clusters
        .into_iter()
        .map(|c| {
            let ray = if c.identical {
                c.anchor
            } else {
                RayState {
                    position: c.sum_position / c.weight,
                    angle: c.sum_angle / c.weight,
                }
            };
            WeightedBeam {
                ray,
                weight: c.weight,
                generation: c.generation,
            }
        })
        .collect();
    ensemble.with_beams(beams)
}

/// Carry every beam from one mirror plane to the other, through the field.
/// Returns the ensemble at the far mirror, before reflection.
fn cross_cavity(
    ensemble: &BeamEnsemble,
    config: &CavityConfig,
    direction: Direction,
) -> Result<BeamEnsemble> {
    let gap = propagation_matrix(config.gap)?;
    let field = propagation_matrix(config.field_length)?;
    let theta = config.theta_split;

    if !config.splits(direction) {
        let whole = propagation_matrix(config.cavity_length)?;
        return ensemble.transform(&whole);
    }

    let mut out = Vec::with_capacity(2 * ensemble.len());
    for beam in &ensemble.beams {
        let at_field = gap.apply(beam.ray)?;
        let (plus, minus) = split(at_field, theta)?;
        for (ray, branch) in [(plus, Branch::Plus), (minus, Branch::Minus)] {
            let exit = angular_enhance(field.apply(ray)?, theta, branch)?;
            out.push(WeightedBeam {
                ray: gap.apply(exit)?,
                weight: 0.5 * beam.weight,
                generation: beam.generation + 1,
            });
        }
    }
    Ok(ensemble.with_beams(out))
}

fn reflect_all(ensemble: &BeamEnsemble, mirror: Mirror) -> Result<BeamEnsemble> {
    ensemble.transform(&mirror.matrix()?)
}

/// One traversal without coalescing: every input beam yields two outputs
/// (when the field splits in this direction), already reflected at the far
/// mirror.
pub fn traverse_uncoalesced(
    ensemble: &BeamEnsemble,
    config: &CavityConfig,
    direction: Direction,
) -> Result<BeamEnsemble> {
    let arrived = cross_cavity(ensemble, config, direction)?;
    reflect_all(&arrived, config.far_mirror(direction))
}

/// One traversal: gap, split, field, enhance, gap, reflection at the far
/// mirror, then coalescing.
pub fn traverse(
    ensemble: &BeamEnsemble,
    config: &CavityConfig,
    direction: Direction,
) -> Result<BeamEnsemble> {
    Ok(coalesce(traverse_uncoalesced(ensemble, config, direction)?))
}

/// Detector-plane ensemble recorded after traversal `traversal` (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub traversal: usize,
    pub ensemble: BeamEnsemble,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CavityRun {
    pub snapshots: Vec<Snapshot>,
    /// Intracavity ensemble after the last reflection.
    pub final_ensemble: BeamEnsemble,
}

/// Run `config.n_traversals` alternating traversals starting forward from M1.
///
/// With `record_detector`, each traversal that ends on the extraction mirror
/// sends a copy of the arriving ensemble through the exit optics to the
/// detector plane. Transmission through the exit mirror is lossless and
/// power-free; the intracavity ensemble is not depleted by the sampling.
pub fn run(config: &CavityConfig, record_detector: bool) -> Result<CavityRun> {
    config.validate()?;
    let to_detector = config.detector_transport()?;
    let mut ensemble = BeamEnsemble::injected(config);
    let mut direction = Direction::Forward;
    let mut snapshots = Vec::new();

    for traversal in 1..=config.n_traversals {
        let arrived = cross_cavity(&ensemble, config, direction)?;
        if record_detector && config.is_extraction_traversal(traversal) {
            let sampled = coalesce(arrived.clone()).transform(&to_detector)?;
            snapshots.push(Snapshot {
                traversal,
                ensemble: sampled,
            });
        }
        ensemble = coalesce(reflect_all(&arrived, config.far_mirror(direction))?);
        direction = direction.reversed();
    }

    Ok(CavityRun {
        snapshots,
        final_ensemble: ensemble,
    })
}

/// Same configuration with the field switched off.
pub fn field_off(config: &CavityConfig) -> CavityConfig {
    CavityConfig {
        theta_split: 0.0,
        ..config.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn confocal(theta: f64) -> CavityConfig {
        CavityConfig {
            theta_split: theta,
            ..build_preset(CavityKind::Confocal)
        }
    }

    fn planar_planar(theta: f64) -> CavityConfig {
        CavityConfig {
            mirror1: Mirror::Planar,
            mirror2: Mirror::Planar,
            theta_split: theta,
            ..build_preset(CavityKind::Confocal)
        }
    }

    #[test]
    fn presets() {
        let c = build_preset(CavityKind::Confocal);
        assert_eq!(
            (c.cavity_length, c.gap, c.field_length, c.detector_distance),
            (14.0, 2.0, 10.0, 2.0)
        );
        assert_eq!(c.mirror1.focal_length(), 12.5);
        assert_eq!(c.mirror2.focal_length(), 12.5);
        c.validate().unwrap();

        let cc = build_preset(CavityKind::ConvexConcave);
        assert_eq!(cc.mirror2, Mirror::Convex { focal: 5.5 });
        assert_eq!(cc.mirror2.focal_length(), -5.5);
        assert_eq!(cc.extraction, ExtractionMirror::M1);

        let pc = build_preset(CavityKind::PlanarConcave);
        assert_eq!(pc.mirror2, Mirror::Planar);
        assert_eq!(pc.mirror1.focal_length(), 12.5);
        assert_eq!(pc.extraction, ExtractionMirror::M1);
    }

    #[test]
    fn validation_rejects_inconsistent_geometry() {
        let mut c = confocal(4e-10);
        c.gap = 3.0;
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
        let c = CavityConfig {
            n_traversals: 0,
            ..confocal(4e-10)
        };
        assert!(c.validate().is_err());
        let c = CavityConfig {
            detector_lens: Some(DetectorLens {
                offset: 3.0,
                focal: 1.0,
            }),
            ..confocal(4e-10)
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn forward_crossing_of_axial_beam() {
        let c = confocal(4e-10);
        let arrived = cross_cavity(&BeamEnsemble::injected(&c), &c, Direction::Forward).unwrap();
        assert_eq!(arrived.len(), 2);
        let plus = arrived.beams[0];
        let minus = arrived.beams[1];
        assert!((plus.ray.angle - 8e-10).abs() < 1e-24);
        assert!((minus.ray.angle + 8e-10).abs() < 1e-24);
        // 10 m with theta, then 2 m with 2 theta
        assert!((plus.ray.position - 14.0 * 4e-10).abs() < 1e-22);
        assert_eq!(plus.weight, 0.5);
        assert_eq!(minus.weight, 0.5);
        assert_eq!(plus.generation, 1);
    }

    #[test]
    fn null_coupling_keeps_one_beam() {
        let c = CavityConfig {
            input: RayState::new(1e-4, 2e-6).unwrap(),
            ..confocal(0.0)
        };
        let e = BeamEnsemble::injected(&c);
        let out = traverse(&e, &c, Direction::Forward).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.beams[0].weight, 1.0);
        let expected = Mirror::Concave { focal: 12.5 }
            .matrix()
            .unwrap()
            .mul(&propagation_matrix(2.0).unwrap())
            .mul(&propagation_matrix(10.0).unwrap())
            .mul(&propagation_matrix(2.0).unwrap())
            .apply(c.input)
            .unwrap();
        assert!((out.beams[0].ray.position - expected.position).abs() < 1e-18);
        assert!((out.beams[0].ray.angle - expected.angle).abs() < 1e-20);
    }

    #[test]
    fn two_traversals_momentum_spectrum() {
        // planar mirrors keep angles exact: net kicks read straight off
        let theta = 4e-10;
        let c = planar_planar(theta);
        let e = BeamEnsemble::injected(&c);
        let one = traverse_uncoalesced(&e, &c, Direction::Forward).unwrap();
        let two = traverse_uncoalesced(&one, &c, Direction::Backward).unwrap();
        assert_eq!(two.len(), 4);
        assert!(two
            .beams
            .iter()
            .all(|b| b.generation == 2 && b.weight == 0.25));
        let quanta: Vec<i64> = two
            .beams
            .iter()
            .map(|b| (b.ray.angle / (2.0 * theta)).round() as i64)
            .collect();
        assert_eq!(quanta, vec![2, 0, 0, -2]);
        // the two zero-momentum beams sit at different positions
        let zero: Vec<f64> = two
            .beams
            .iter()
            .filter(|b| b.ray.angle.abs() < theta)
            .map(|b| b.ray.position)
            .collect();
        assert!((zero[0] + zero[1]).abs() < 1e-22);
        assert!(zero[0] != zero[1]);
        assert_eq!(coalesce(two).len(), 4);
    }

    #[test]
    fn reflect_examples() {
        let ray = RayState::new(2e-4, 3e-7).unwrap();
        assert_eq!(reflect_and_conserve(ray, Mirror::Planar).unwrap(), ray);
        let axial = RayState::new(0.0, 3e-7).unwrap();
        let concave = Mirror::Concave { focal: 12.5 };
        assert_eq!(reflect_and_conserve(axial, concave).unwrap(), axial);
        let off = reflect_and_conserve(RayState::new(1e-3, 0.0).unwrap(), concave).unwrap();
        assert!((off.angle + 8e-5).abs() < 1e-18);
    }

    fn beam(x: f64, a: f64, w: f64) -> WeightedBeam {
        WeightedBeam {
            ray: RayState {
                position: x,
                angle: a,
            },
            weight: w,
            generation: 0,
        }
    }

    #[test]
    fn coalesce_identical_pair() {
        let e = BeamEnsemble {
            beams: vec![beam(1e-9, 2e-10, 0.25), beam(1e-9, 2e-10, 0.25)],
            coalesce_tol_position: DEFAULT_COALESCE_POSITION,
            coalesce_tol_angle: DEFAULT_COALESCE_ANGLE,
        };
        let out = coalesce(e);
        assert_eq!(out.len(), 1);
        assert_eq!(out.beams[0].weight, 0.5);
        assert_eq!(out.beams[0].ray, RayState::new(1e-9, 2e-10).unwrap());
    }

    #[test]
    fn coalesce_zero_tolerance_keeps_distinct_states() {
        let e = BeamEnsemble {
            beams: vec![
                beam(1e-9, 0.0, 0.25),
                beam(1e-9 + 1e-24, 0.0, 0.25),
                beam(1e-9, 1e-25, 0.25),
                beam(1e-9, 0.0, 0.25),
            ],
            coalesce_tol_position: 0.0,
            coalesce_tol_angle: 0.0,
        };
        let out = coalesce(e);
        assert_eq!(out.len(), 3);
        assert_eq!(out.total_weight(), 1.0);
    }

    #[test]
    fn coalesce_weighted_mean_and_fixpoint() {
        // chain a - b - c: anchored sweep merges a+b, then the mean is close to c
        let e = BeamEnsemble {
            beams: vec![
                beam(0.0, 0.0, 0.25),
                beam(0.9, 0.0, 0.25),
                beam(1.4, 0.0, 0.5),
            ],
            coalesce_tol_position: 1.0,
            coalesce_tol_angle: 1.0,
        };
        let out = coalesce(e);
        assert_eq!(out.len(), 1);
        assert!((out.beams[0].ray.position - (0.9 * 0.25 + 1.4 * 0.5)).abs() < 1e-15);
        assert!(!out.has_mergeable_pair());
    }

    #[test]
    fn extraction_schedule() {
        let c = build_preset(CavityKind::Confocal);
        assert!((1..=4).all(|i| c.is_extraction_traversal(i)));
        let cc = build_preset(CavityKind::ConvexConcave);
        let picked: Vec<usize> = (1..=6).filter(|&i| cc.is_extraction_traversal(i)).collect();
        assert_eq!(picked, vec![2, 4, 6]);
    }

    #[test]
    fn single_traversal_snapshot_matches_closed_form() {
        let theta = 4e-10;
        let c = CavityConfig {
            n_traversals: 1,
            ..confocal(theta)
        };
        let run = run(&c, true).unwrap();
        assert_eq!(run.snapshots.len(), 1);
        let snap = &run.snapshots[0].ensemble;
        assert_eq!(snap.len(), 2);
        for b in &snap.beams {
            assert!((b.ray.position.abs() - 18.0 * theta).abs() <= 1e-12 * 18.0 * theta);
        }
    }

    #[test]
    fn backward_passes_can_skip_splitting() {
        let c = CavityConfig {
            split_on_backward: false,
            n_traversals: 4,
            ..confocal(4e-10)
        };
        let out = run(&c, false).unwrap();
        assert_eq!(out.final_ensemble.len(), 4);
        assert!(out.final_ensemble.beams.iter().all(|b| b.generation == 2));
    }

    #[test]
    fn detector_lens_transport() {
        let c = CavityConfig {
            detector_lens: Some(DetectorLens {
                offset: 0.5,
                focal: 1.0,
            }),
            ..confocal(0.0)
        };
        let m = c.detector_transport().unwrap();
        assert!((m.determinant() - 1.0).abs() < 1e-12);
        let expected = propagation_matrix(1.5)
            .unwrap()
            .mul(&focusing_matrix(1.0).unwrap())
            .mul(&propagation_matrix(0.5).unwrap());
        assert_eq!(m, expected);
    }
}
