use std::collections::BTreeMap;

use crate::topology::NodeId;

/// Packets taken from each queue for one link direction.
pub type PacketBatch = BTreeMap<NodeId, u64>;

/// Splits `quota` packets across `queues` in proportion to their lengths
/// using largest-remainder apportionment; equal remainders go to the lowest
/// id. If everything fits, every queue is emptied.
pub fn apportion(quota: u64, queues: &BTreeMap<NodeId, u64>) -> PacketBatch {
    let total: u64 = queues.values().sum();
    if quota == 0 || total == 0 {
        return PacketBatch::new();
    }
    if total <= quota {
        return queues
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(&k, &c)| (k, c))
            .collect();
    }
    let quota128 = u128::from(quota);
    let total128 = u128::from(total);
    let mut taken = PacketBatch::new();
    let mut remainders: Vec<(u128, NodeId)> = Vec::with_capacity(queues.len());
    let mut assigned = 0u64;
    for (&k, &c) in queues {
        let exact = quota128 * u128::from(c);
        let floor = (exact / total128) as u64;
        assigned += floor;
        taken.insert(k, floor);
        remainders.push((exact % total128, k));
    }
    // Largest remainder first, lowest id on ties.
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, k) in remainders.into_iter().take((quota - assigned) as usize) {
        *taken.get_mut(&k).expect("key present") += 1;
    }
    taken.retain(|_, c| *c > 0);
    taken
}

/// Downlink and uplink packets moved on one link in a subframe, at one
/// packet per allocated slot.
pub fn fill_packets(
    n_down: u32,
    n_up: u32,
    downlink_queues: &BTreeMap<NodeId, u64>,
    uplink_queues: &BTreeMap<NodeId, u64>,
    packets_per_slot: u64,
) -> (PacketBatch, PacketBatch) {
    (
        apportion(u64::from(n_down) * packets_per_slot, downlink_queues),
        apportion(u64::from(n_up) * packets_per_slot, uplink_queues),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn queues(v: &[(usize, u64)]) -> BTreeMap<NodeId, u64> {
        v.iter().map(|&(k, c)| (NodeId(k), c)).collect()
    }

    #[test]
    fn under_quota_takes_everything() {
        assert_eq!(
            apportion(6, &queues(&[(1, 4), (2, 2)])),
            queues(&[(1, 4), (2, 2)])
        );
    }

    #[test]
    fn tie_goes_to_lowest_id() {
        assert_eq!(
            apportion(5, &queues(&[(1, 10), (2, 10)])),
            queues(&[(1, 3), (2, 2)])
        );
    }

    #[test]
    fn zero_quota_takes_nothing() {
        assert!(apportion(0, &queues(&[(1, 10)])).is_empty());
        let (dl, ul) = fill_packets(0, 0, &queues(&[(1, 3)]), &queues(&[(2, 3)]), 1);
        assert!(dl.is_empty() && ul.is_empty());
    }

    #[test]
    fn proportional_split() {
        // 7 * 6/9 = 4.67, 7 * 3/9 = 2.33 -> floors (4, 2), one left for the 0.67 remainder.
        assert_eq!(
            apportion(7, &queues(&[(3, 6), (8, 3)])),
            queues(&[(3, 5), (8, 2)])
        );
    }
}
