use crate::error::{Error, Result};
use crate::scenegen::Camera;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViewSelection {
    pub target_id: usize,
    /// Nearest first.
    pub source_ids: Vec<usize>,
}

/// The `n_src` cameras closest to the target by camera-center distance,
/// excluding the target itself. Ties go to the lower view id.
pub fn select_sources(
    target_id: usize,
    target: &Camera,
    candidates: &[(usize, Camera)],
    n_src: usize,
) -> Result<ViewSelection> {
    let center = target.center();
    let mut ranked: Vec<(f64, usize)> = candidates
        .iter()
        .filter(|(id, _)| *id != target_id)
        .map(|(id, cam)| ((cam.center() - center).norm(), *id))
        .collect();
    if ranked.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    ranked.dedup_by_key(|r| r.1);
    Ok(ViewSelection {
        target_id,
        source_ids: ranked.into_iter().take(n_src).map(|(_, id)| id).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam_at(x: f64) -> Camera {
        Camera {
            fx: 1.0,
            fy: 1.0,
            cx: 0.0,
            cy: 0.0,
            r: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            t: [-x, 0.0, 0.0],
        }
    }

    #[test]
    fn middle_of_three_picks_both_neighbors() {
        let cams: Vec<_> = [0.0, 1.0, 2.0].iter().map(|&x| cam_at(x)).enumerate().collect();
        let sel = select_sources(1, &cams[1].1, &cams, 2).unwrap();
        assert_eq!(sel.source_ids, vec![0, 2]);
    }

    #[test]
    fn ties_go_to_lower_id_and_count_is_clamped() {
        let cams = vec![(7, cam_at(-1.0)), (3, cam_at(1.0)), (5, cam_at(0.0)), (9, cam_at(3.0))];
        let sel = select_sources(5, &cam_at(0.0), &cams, 10).unwrap();
        assert_eq!(sel.source_ids, vec![3, 7, 9]);
    }

    #[test]
    fn no_candidates_is_an_error() {
        let cams = vec![(0, cam_at(0.0))];
        assert!(matches!(
            select_sources(0, &cams[0].1, &cams, 9),
            Err(Error::EmptyCandidates)
        ));
    }
}
