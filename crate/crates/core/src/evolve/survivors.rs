use crate::fitness::{Objectives, ParetoRanking};
use crate::genome::SolutionId;

/// Elitist truncation of a parent+offspring pool down to `n` members.
///
/// Whole fronts are taken in order; the front that overflows is cut by
/// descending crowding distance, lower solution id first on ties. Returned
/// indices are in selection order.
pub fn survivor_selection(objectives: &[Objectives], ids: &[SolutionId], n: usize) -> Vec<usize> {
    assert_eq!(objectives.len(), ids.len(), "one id per objective vector");
    let ranking = ParetoRanking::compute(objectives);
    let mut selected = Vec::with_capacity(n);
    for front in &ranking.fronts {
        let room = n - selected.len();
        if room == 0 {
            break;
        }
        if front.len() <= room {
            selected.extend_from_slice(front);
            continue;
        }
        let mut last = front.clone();
        last.sort_by(|&a, &b| {
            ranking.crowding[b]
                .total_cmp(&ranking.crowding[a])
                .then(ids[a].cmp(&ids[b]))
        });
        selected.extend_from_slice(&last[..room]);
    }
    selected
}
