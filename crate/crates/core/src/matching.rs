//! Maximum bipartite matching with a König vertex-cover certificate.

use std::collections::BTreeSet;

/// Augmenting-path maximum matching between `left_count` left vertices and
/// `right_count` right vertices. Deterministic: left vertices are processed
/// in ascending id order and adjacency lists are scanned as given.
#[derive(Debug, Clone)]
pub struct Matching {
    pub left_count: usize,
    pub right_count: usize,
    adj: Vec<Vec<usize>>,
    /// match_of_right[r] = matched left vertex, if any.
    pub match_of_right: Vec<Option<usize>>,
    /// match_of_left[l] = matched right vertex, if any.
    pub match_of_left: Vec<Option<usize>>,
}

impl Matching {
    pub fn compute(left_count: usize, right_count: usize, adj: Vec<Vec<usize>>) -> Self {
        assert_eq!(adj.len(), left_count);
        let mut m = Matching {
            left_count,
            right_count,
            adj,
            match_of_right: vec![None; right_count],
            match_of_left: vec![None; left_count],
        };
        for l in 0..left_count {
            let mut seen = vec![false; left_count];
            m.try_augment(l, &mut seen);
        }
        for r in 0..right_count {
            if let Some(l) = m.match_of_right[r] {
                m.match_of_left[l] = Some(r);
            }
        }
        m
    }

    fn try_augment(&mut self, l: usize, seen: &mut [bool]) -> bool {
        if seen[l] {
            return false;
        }
        seen[l] = true;
        for k in 0..self.adj[l].len() {
            let r = self.adj[l][k];
            match self.match_of_right[r] {
                None => {
                    self.match_of_right[r] = Some(l);
                    return true;
                }
                Some(l2) => {
                    if self.try_augment(l2, seen) {
                        self.match_of_right[r] = Some(l);
                        return true;
                    }
                }
            }
        }
        false
    }

    pub fn size(&self) -> usize {
        self.match_of_right.iter().filter(|x| x.is_some()).count()
    }

    /// König minimum vertex cover: (left cover, right cover).
    ///
    /// Its size equals the matching size, certifying maximality.
    pub fn koenig_cover(&self) -> (BTreeSet<usize>, BTreeSet<usize>) {
        // Z = unmatched left vertices plus everything reachable by
        // alternating paths (unmatched edge left->right, matched right->left).
        let mut z_left = vec![false; self.left_count];
        let mut z_right = vec![false; self.right_count];
        let mut stack: Vec<usize> = (0..self.left_count)
            .filter(|&l| self.match_of_left[l].is_none())
            .collect();
        for &l in &stack {
            z_left[l] = true;
        }
        while let Some(l) = stack.pop() {
            for &r in &self.adj[l] {
                if Some(r) == self.match_of_left[l] || z_right[r] {
                    continue;
                }
                z_right[r] = true;
                if let Some(l2) = self.match_of_right[r] {
                    if !z_left[l2] {
                        z_left[l2] = true;
                        stack.push(l2);
                    }
                }
            }
        }
        let cover_left = (0..self.left_count).filter(|&l| !z_left[l]).collect();
        let cover_right = (0..self.right_count).filter(|&r| z_right[r]).collect();
        (cover_left, cover_right)
    }

    /// Checks that the cover touches every edge and has matching size.
    pub fn verify_cover(&self) -> bool {
        let (cl, cr) = self.koenig_cover();
        if cl.len() + cr.len() != self.size() {
            return false;
        }
        for l in 0..self.left_count {
            for &r in &self.adj[l] {
                if !cl.contains(&l) && !cr.contains(&r) {
                    return false;
                }
            }
        }
        true
    }
}
