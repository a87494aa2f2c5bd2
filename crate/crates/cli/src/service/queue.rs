use std::collections::HashMap;
use std::time::{Duration, Instant};

use hairstep::annotate::{AnnotationAnswer, PairSample, GROUPS};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::exit;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Handout {
    /// Index of the pair handed out.
    Task(usize),
    /// Every pair has an answer from this group.
    Drained,
    /// All remaining pairs are reserved; the earliest frees up after this.
    Busy(Duration),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    BadGroup,
    UnknownPair,
    Duplicate,
}

#[derive(Debug)]
struct GroupQueue {
    order: Vec<usize>,
    done: Vec<bool>,
    leases: HashMap<usize, Instant>,
    /// Every entry of `order` before this is done.
    cursor: usize,
}

/// Pending and completed pairs per group plus the answers so far.
#[derive(Debug)]
pub struct TaskQueue {
    pairs: Vec<PairSample>,
    index: HashMap<String, usize>,
    groups: Vec<GroupQueue>,
    answers: Vec<AnnotationAnswer>,
    lease: Duration,
}

impl TaskQueue {
    /// Each group sees every pair once, in its own seeded random order.
    pub fn new(pairs: Vec<PairSample>, seed: u64, lease: Duration) -> anyhow::Result<Self> {
        let mut index = HashMap::with_capacity(pairs.len());
        for (i, p) in pairs.iter().enumerate() {
            if index.insert(p.pair_id.clone(), i).is_some() {
                return Err(exit::invalid(format!("pair id {} appears twice", p.pair_id)));
            }
        }
        let groups = (0..GROUPS as u64)
            .map(|g| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(g);
                let mut order: Vec<usize> = (0..pairs.len()).collect();
                order.shuffle(&mut rng);
                GroupQueue {
                    order,
                    done: vec![false; pairs.len()],
                    leases: HashMap::new(),
                    cursor: 0,
                }
            })
            .collect();
        Ok(Self {
            pairs,
            index,
            groups,
            answers: Vec::new(),
            lease,
        })
    }

    pub fn pair(&self, i: usize) -> &PairSample {
        &self.pairs[i]
    }

    pub fn pairs(&self) -> &[PairSample] {
        &self.pairs
    }

    pub fn answers(&self) -> &[AnnotationAnswer] {
        &self.answers
    }

    fn group(&self, g: u8) -> Option<&GroupQueue> {
        (1..=GROUPS).contains(&g).then(|| &self.groups[g as usize - 1])
    }

    /// Whether `answer` would be accepted, without recording it.
    pub fn check(&self, answer: &AnnotationAnswer) -> Result<usize, Rejection> {
        let q = self.group(answer.group_id).ok_or(Rejection::BadGroup)?;
        let &i = self.index.get(&answer.pair_id).ok_or(Rejection::UnknownPair)?;
        if q.done[i] {
            return Err(Rejection::Duplicate);
        }
        Ok(i)
    }

    pub fn record(&mut self, answer: AnnotationAnswer) -> Result<(), Rejection> {
        let i = self.check(&answer)?;
        let q = &mut self.groups[answer.group_id as usize - 1];
        q.done[i] = true;
        q.leases.remove(&i);
        while q.cursor < q.order.len() && q.done[q.order[q.cursor]] {
            q.cursor += 1;
        }
        self.answers.push(answer);
        Ok(())
    }

    /// Hands out the next unanswered pair not reserved for `group`, and
    /// reserves it. `None` for a group outside `1..=3`.
    pub fn next_task(&mut self, group: u8, now: Instant) -> Option<Handout> {
        self.group(group)?;
        let lease = self.lease;
        let q = &mut self.groups[group as usize - 1];
        q.leases.retain(|_, &mut until| until > now);
        let mut soonest: Option<Instant> = None;
        for &i in &q.order[q.cursor..] {
            if q.done[i] {
                continue;
            }
            match q.leases.get(&i) {
                Some(&until) => soonest = Some(soonest.map_or(until, |s| s.min(until))),
                None => {
                    q.leases.insert(i, now + lease);
                    return Some(Handout::Task(i));
                }
            }
        }
        Some(match soonest {
            Some(t) => Handout::Busy(t - now),
            None => Handout::Drained,
        })
    }
}

#[cfg(test)]
mod tests {
    use hairstep::annotate::Choice;

    use super::*;

    fn pairs(n: usize) -> Vec<PairSample> {
        (0..n)
            .map(|i| PairSample {
                pair_id: i.to_string(),
                image_id: None,
                p1: [0, 0],
                p2: [1, 0],
                super_pixels: [1, 2],
            })
            .collect()
    }

    fn answer(i: usize, g: u8) -> AnnotationAnswer {
        AnnotationAnswer {
            pair_id: i.to_string(),
            group_id: g,
            choice: Choice::Blue,
            elapsed: 2.0,
        }
    }

    #[test]
    fn each_group_sees_every_pair_once() {
        let mut q = TaskQueue::new(pairs(6), 1, Duration::from_secs(60)).unwrap();
        let now = Instant::now();
        for g in 1..=3 {
            let mut seen = Vec::new();
            while let Some(Handout::Task(i)) = q.next_task(g, now) {
                seen.push(i);
                q.record(answer(i, g)).unwrap();
            }
            seen.sort();
            assert_eq!(seen, (0..6).collect::<Vec<_>>());
            assert_eq!(q.next_task(g, now), Some(Handout::Drained));
        }
        assert_eq!(q.next_task(4, now), None);
    }

    #[test]
    fn leased_pairs_are_not_handed_out_twice() {
        let mut q = TaskQueue::new(pairs(2), 0, Duration::from_secs(30)).unwrap();
        let now = Instant::now();
        let Some(Handout::Task(a)) = q.next_task(1, now) else { panic!() };
        let Some(Handout::Task(b)) = q.next_task(1, now) else { panic!() };
        assert_ne!(a, b);
        assert_eq!(q.next_task(1, now), Some(Handout::Busy(Duration::from_secs(30))));
        // other groups are unaffected
        assert!(matches!(q.next_task(2, now), Some(Handout::Task(_))));
        // an expired lease is handed out again
        assert!(matches!(q.next_task(1, now + Duration::from_secs(31)), Some(Handout::Task(_))));
    }

    #[test]
    fn rejections() {
        let mut q = TaskQueue::new(pairs(1), 0, Duration::from_secs(1)).unwrap();
        q.record(answer(0, 1)).unwrap();
        assert_eq!(q.record(answer(0, 1)), Err(Rejection::Duplicate));
        assert_eq!(q.record(answer(5, 1)), Err(Rejection::UnknownPair));
        assert_eq!(q.record(answer(0, 0)), Err(Rejection::BadGroup));
        assert_eq!(q.answers().len(), 1);
        assert!(TaskQueue::new([pairs(1), pairs(1)].concat(), 0, Duration::ZERO).is_err());
    }

    #[test]
    fn order_depends_only_on_seed() {
        let a = TaskQueue::new(pairs(20), 3, Duration::ZERO).unwrap();
        let b = TaskQueue::new(pairs(20), 3, Duration::ZERO).unwrap();
        for g in 0..3 {
            assert_eq!(a.groups[g].order, b.groups[g].order);
        }
        assert_ne!(a.groups[0].order, a.groups[1].order);
    }
}
