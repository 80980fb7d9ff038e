//! Region-of-interest grouping of decoded footprints.

use crate::camera::PixelFootprint;
use crate::occ::{BeaconId, BeaconKind};

/// A footprint and the identity decoded for it, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedFootprint {
    pub footprint: PixelFootprint,
    pub id: Option<BeaconId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Roi {
    pub id: BeaconId,
    pub footprints: Vec<PixelFootprint>,
}

impl Roi {
    pub fn kind(&self) -> BeaconKind {
        self.id.kind()
    }
}

/// Groups footprints by decoded identity: a vehicle's two taillights share
/// one ROI, each streetlight has its own, and undecoded footprints are
/// dropped. Output is ordered streetlights first, then by id.
pub fn select_roi(footprints: &[DecodedFootprint]) -> Vec<Roi> {
    let mut rois: Vec<Roi> = Vec::new();
    for df in footprints {
        let Some(id) = df.id else { continue };
        match rois
            .iter_mut()
            .find(|r| r.id.id == id.id && r.kind() == id.kind())
        {
            Some(roi) => roi.footprints.push(df.footprint.clone()),
            None => rois.push(Roi { id, footprints: vec![df.footprint.clone()] }),
        }
    }
    rois.sort_by_key(|r| (r.kind() != BeaconKind::Streetlight, r.id.id));
    rois
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(u: f64) -> PixelFootprint {
        PixelFootprint {
            pixel_count: 10,
            centroid: (u, 0.0),
            horizontal_displacement: u,
            source_beacon: None,
            outline: vec![],
            continuous_area: 10.0,
        }
    }

    fn decoded(u: f64, id: Option<BeaconId>) -> DecodedFootprint {
        DecodedFootprint { footprint: fp(u), id }
    }

    #[test]
    fn taillight_pair_forms_one_roi() {
        let id = BeaconId::vehicle(4, 0.01);
        let rois = select_roi(&[decoded(-5.0, Some(id)), decoded(5.0, Some(id))]);
        assert_eq!(rois.len(), 1);
        assert_eq!(rois[0].footprints.len(), 2);
    }

    #[test]
    fn parallel_vehicles_stay_apart() {
        let a = BeaconId::vehicle(4, 0.01);
        let b = BeaconId::vehicle(5, 0.01);
        let rois = select_roi(&[
            decoded(-50.0, Some(a)),
            decoded(50.0, Some(b)),
            decoded(-40.0, Some(a)),
            decoded(60.0, Some(b)),
        ]);
        assert_eq!(rois.len(), 2);
        assert!(rois.iter().all(|r| r.footprints.len() == 2));
    }

    #[test]
    fn undecoded_footprints_are_dropped() {
        let sl = BeaconId::streetlight(4, 7.0, 25.0);
        let rois = select_roi(&[decoded(0.0, None), decoded(1.0, Some(sl))]);
        assert_eq!(rois.len(), 1);
        assert_eq!(rois[0].kind(), BeaconKind::Streetlight);
    }

    #[test]
    fn same_number_different_kind_is_distinct() {
        let rois = select_roi(&[
            decoded(0.0, Some(BeaconId::vehicle(4, 0.01))),
            decoded(1.0, Some(BeaconId::streetlight(4, 7.0, 25.0))),
        ]);
        assert_eq!(rois.len(), 2);
        assert_eq!(rois[0].kind(), BeaconKind::Streetlight);
    }
}
