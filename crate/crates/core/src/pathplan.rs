//! Assigning movable antennas to destination positions with short total travel.

use crate::error::{Error, Result};
use crate::geometry::Position3;

/// Destination index per antenna, with per-move and total straight-line distance.
#[derive(Debug, Clone, PartialEq)]
pub struct MovePlan {
    pub assignment: Vec<usize>,
    pub distances: Vec<f64>,
    pub total: f64,
}

impl MovePlan {
    fn from_assignment(initial: &[Position3<f64>], dest: &[Position3<f64>], assignment: Vec<usize>) -> Self {
        let distances: Vec<f64> = assignment.iter().enumerate().map(|(i, &d)| initial[i].distance(dest[d])).collect();
        let total = distances.iter().sum();
        Self { assignment, distances, total }
    }
}

fn check(initial: &[Position3<f64>], dest: &[Position3<f64>]) -> Result<()> {
    if initial.len() != dest.len() {
        return Err(Error::Dimension(format!("{} antennas for {} destinations", initial.len(), dest.len())));
    }
    if initial.is_empty() {
        return Err(Error::invalid("antennas", "need at least one"));
    }
    Ok(())
}

/// Antennas in index order each claim the nearest unclaimed destination
/// (ties: lowest destination index).
pub fn greedy_match(initial: &[Position3<f64>], dest: &[Position3<f64>]) -> Result<MovePlan> {
    check(initial, dest)?;
    let mut free = vec![true; dest.len()];
    let mut assignment = Vec::with_capacity(initial.len());
    for q in initial {
        let mut best: Option<(usize, f64)> = None;
        for (j, d) in dest.iter().enumerate() {
            if !free[j] {
                continue;
            }
            let dist = q.distance(*d);
            if best.is_none_or(|(_, b)| dist < b) {
                best = Some((j, dist));
            }
        }
        let (j, _) = best.expect("as many destinations as antennas");
        free[j] = false;
        assignment.push(j);
    }
    Ok(MovePlan::from_assignment(initial, dest, assignment))
}

/// Largest instance accepted by [`brute_force_match`].
pub const BRUTE_FORCE_MAX: usize = 9;

/// Exact minimum-total-distance assignment by enumerating permutations in
/// lexicographic order (ties: the lexicographically smallest permutation).
pub fn brute_force_match(initial: &[Position3<f64>], dest: &[Position3<f64>]) -> Result<MovePlan> {
    check(initial, dest)?;
    let n = initial.len();
    if n > BRUTE_FORCE_MAX {
        return Err(Error::invalid("antennas", format!("brute force supports at most {BRUTE_FORCE_MAX}, got {n}")));
    }
    let cost: Vec<Vec<f64>> = initial.iter().map(|q| dest.iter().map(|d| q.distance(*d)).collect()).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_total = f64::INFINITY;
    loop {
        let total: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        if total < best_total {
            best_total = total;
            best.clone_from(&perm);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(MovePlan::from_assignment(initial, dest, best))
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xs(v: &[f64]) -> Vec<Position3<f64>> {
        v.iter().map(|&x| Position3::new(x, 0.0, 0.0)).collect()
    }

    #[test]
    fn identity_and_in_order_examples() {
        let p = xs(&[0.0, 3.0, 7.0]);
        let g = greedy_match(&p, &p).unwrap();
        assert_eq!((g.assignment.clone(), g.total), (vec![0, 1, 2], 0.0));
        let g = greedy_match(&xs(&[0.0, 10.0, 20.0]), &xs(&[1.0, 11.0, 21.0])).unwrap();
        let b = brute_force_match(&xs(&[0.0, 10.0, 20.0]), &xs(&[1.0, 11.0, 21.0])).unwrap();
        assert_eq!(g.assignment, vec![0, 1, 2]);
        assert!((g.total - 3.0).abs() < 1e-12 && (b.total - 3.0).abs() < 1e-12);
    }

    #[test]
    fn greedy_can_lose_to_brute_force() {
        // antenna 0 grabs the destination at 0.9 and leaves antenna 1 a long trip
        let (init, dest) = (xs(&[0.0, 1.9]), xs(&[0.9, -1.0]));
        let g = greedy_match(&init, &dest).unwrap();
        let b = brute_force_match(&init, &dest).unwrap();
        assert_eq!((g.assignment.clone(), b.assignment.clone()), (vec![0, 1], vec![1, 0]));
        assert!((g.total - 3.8).abs() < 1e-12 && (b.total - 2.0).abs() < 1e-12);
    }

    #[test]
    fn permutation_enumeration_is_complete() {
        let mut p = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 24);
        assert!(brute_force_match(&xs(&[0.0; 10]), &xs(&[0.0; 10])).is_err());
        assert!(greedy_match(&xs(&[0.0]), &xs(&[0.0, 1.0])).is_err());
    }
}
