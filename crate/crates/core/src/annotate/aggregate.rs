use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Number of annotation groups that see every pair.
pub const GROUPS: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Choice {
    /// The red point (`p1`) looks closer.
    Red,
    /// The blue point (`p2`) looks closer.
    Blue,
    Unsure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnnotationAnswer {
    pub pair_id: String,
    pub group_id: u8,
    pub choice: Choice,
    /// Seconds the annotator took to decide.
    pub elapsed: f64,
}

/// Consensus label of one pair. `r` is `+1` when the red point is closer,
/// `-1` when the blue point is, and absent when the pair is not valid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AggregatedLabel {
    pub pair_id: String,
    pub r: Option<i8>,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AggregateStats {
    pub answered: usize,
    pub pairs: usize,
    pub valid: usize,
    pub invalid: usize,
    /// `valid / pairs`.
    pub valid_fraction: Option<f64>,
    /// Among pairs answered by all groups, the fraction where every group
    /// gave the same answer (including all-unsure).
    pub agreement_rate: Option<f64>,
    pub median_elapsed: Option<f64>,
}

/// Applies the consensus rule: a pair is valid only when all three groups
/// answered, none was unsure, and all answers agree.
pub fn aggregate_answers(answers: &[AnnotationAnswer]) -> Result<(Vec<AggregatedLabel>, AggregateStats)> {
    let mut order: Vec<&str> = Vec::new();
    let mut by_pair: HashMap<&str, [Option<Choice>; GROUPS as usize]> = HashMap::new();
    for a in answers {
        if !(1..=GROUPS).contains(&a.group_id) {
            return Err(Error::invalid(format!(
                "pair {}: group {} is not in 1..={GROUPS}",
                a.pair_id, a.group_id
            )));
        }
        let slots = by_pair.entry(&a.pair_id).or_insert_with(|| {
            order.push(&a.pair_id);
            [None; GROUPS as usize]
        });
        let slot = &mut slots[a.group_id as usize - 1];
        if slot.is_some() {
            return Err(Error::invalid(format!(
                "duplicate answer for pair {} from group {}",
                a.pair_id, a.group_id
            )));
        }
        *slot = Some(a.choice);
    }

    let mut labels = Vec::with_capacity(order.len());
    let (mut complete, mut agreeing) = (0usize, 0usize);
    for id in order {
        let slots = by_pair[id];
        let r = consensus(&slots);
        if slots.iter().all(Option::is_some) {
            complete += 1;
            if slots.iter().all(|s| *s == slots[0]) {
                agreeing += 1;
            }
        }
        labels.push(AggregatedLabel {
            pair_id: id.to_string(),
            r,
            valid: r.is_some(),
        });
    }

    let valid = labels.iter().filter(|l| l.valid).count();
    let pairs = labels.len();
    let mut elapsed: Vec<f64> = answers.iter().map(|a| a.elapsed).collect();
    let stats = AggregateStats {
        answered: answers.len(),
        pairs,
        valid,
        invalid: pairs - valid,
        valid_fraction: (pairs > 0).then(|| valid as f64 / pairs as f64),
        agreement_rate: (complete > 0).then(|| agreeing as f64 / complete as f64),
        median_elapsed: median(&mut elapsed),
    };
    Ok((labels, stats))
}

fn consensus(slots: &[Option<Choice>; GROUPS as usize]) -> Option<i8> {
    match *slots {
        [Some(Choice::Red), Some(Choice::Red), Some(Choice::Red)] => Some(1),
        [Some(Choice::Blue), Some(Choice::Blue), Some(Choice::Blue)] => Some(-1),
        _ => None,
    }
}

pub(crate) fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn answers(id: &str, choices: &[Choice]) -> Vec<AnnotationAnswer> {
        choices
            .iter()
            .enumerate()
            .map(|(g, &c)| AnnotationAnswer {
                pair_id: id.into(),
                group_id: g as u8 + 1,
                choice: c,
                elapsed: 1.0 + g as f64,
            })
            .collect()
    }

    use Choice::*;

    #[test]
    fn consensus_examples() {
        let (l, _) = aggregate_answers(&answers("a", &[Red, Red, Red])).unwrap();
        assert_eq!(l[0], AggregatedLabel { pair_id: "a".into(), r: Some(1), valid: true });
        let (l, _) = aggregate_answers(&answers("a", &[Red, Red, Blue])).unwrap();
        assert!(!l[0].valid);
        let (l, _) = aggregate_answers(&answers("a", &[Red, Red, Unsure])).unwrap();
        assert!(!l[0].valid);
        let (l, _) = aggregate_answers(&answers("a", &[Red, Red])).unwrap();
        assert!(!l[0].valid);
    }

    #[test]
    fn duplicate_is_rejected() {
        let mut a = answers("a", &[Red, Blue]);
        a.push(a[0].clone());
        assert!(aggregate_answers(&a).is_err());
    }

    #[test]
    fn stats() {
        let mut a = answers("a", &[Blue, Blue, Blue]);
        a.extend(answers("b", &[Unsure, Unsure, Unsure]));
        a.extend(answers("c", &[Red]));
        let (labels, s) = aggregate_answers(&a).unwrap();
        assert_eq!(labels.iter().map(|l| l.pair_id.as_str()).collect::<Vec<_>>(), ["a", "b", "c"]);
        assert_eq!((s.pairs, s.valid, s.invalid, s.answered), (3, 1, 2, 7));
        assert_eq!(s.agreement_rate, Some(1.0));
        assert_eq!(s.median_elapsed, Some(2.0));
    }

    #[test]
    fn wire_format() {
        let a: AnnotationAnswer =
            serde_json::from_str(r#"{"pairId":"x","groupId":2,"choice":"UNSURE","elapsed":4.6}"#).unwrap();
        assert_eq!(a.choice, Unsure);
        let l = AggregatedLabel { pair_id: "x".into(), r: Some(-1), valid: true };
        assert_eq!(serde_json::to_string(&l).unwrap(), r#"{"pairId":"x","r":-1,"valid":true}"#);
    }
}
