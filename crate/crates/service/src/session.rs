//! Per-session state, folded from its event log.

use serde::{Deserialize, Serialize};
use vistutor_core::Strategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Tutorial,
    Teaching,
    Testing,
    Done,
}

/// One line of a session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Created {
        session_id: String,
        strategy: Strategy,
        teach_ids: Vec<String>,
        test_ids: Vec<String>,
        /// Class index behind each response button, in display order.
        button_order: Vec<usize>,
        at: u64,
    },
    Issued {
        phase: Phase,
        index: usize,
        at: u64,
    },
    Responded {
        phase: Phase,
        index: usize,
        item_id: String,
        choice: usize,
        correct: bool,
        at: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub phase: Phase,
    pub index: usize,
    pub item_id: String,
    pub choice: usize,
    pub correct: bool,
    pub at: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub id: String,
    pub strategy: Strategy,
    pub teach_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub button_order: Vec<usize>,
    pub created_at: u64,
    pub phase: Phase,
    pub cursor: usize,
    /// Set while an item has been handed out and not yet answered.
    pub issued_at: Option<u64>,
    /// Time the most recent teaching feedback was returned.
    pub feedback_at: Option<u64>,
    pub responses: Vec<ResponseRecord>,
}

impl Session {
    pub fn from_created(event: &Event) -> Result<Session, String> {
        match event {
            Event::Created {
                session_id,
                strategy,
                teach_ids,
                test_ids,
                button_order,
                at,
            } => {
                if teach_ids.is_empty() || test_ids.is_empty() {
                    return Err("empty teaching or test sequence".into());
                }
                let mut sorted = button_order.clone();
                sorted.sort_unstable();
                if sorted.iter().enumerate().any(|(i, &c)| i != c) {
                    return Err("button order is not a permutation".into());
                }
                Ok(Session {
                    id: session_id.clone(),
                    strategy: *strategy,
                    teach_ids: teach_ids.clone(),
                    test_ids: test_ids.clone(),
                    button_order: button_order.clone(),
                    created_at: *at,
                    phase: Phase::Tutorial,
                    cursor: 0,
                    issued_at: None,
                    feedback_at: None,
                    responses: Vec::new(),
                })
            }
            _ => Err("log does not start with a created event".into()),
        }
    }

    /// Rebuilds a session from its full event sequence.
    pub fn fold(events: &[Event]) -> Result<Session, String> {
        let (first, rest) = events.split_first().ok_or("empty log")?;
        let mut s = Session::from_created(first)?;
        for (n, ev) in rest.iter().enumerate() {
            s.apply(ev).map_err(|e| format!("event {}: {e}", n + 2))?;
        }
        Ok(s)
    }

    pub fn phase_len(&self, phase: Phase) -> usize {
        match phase {
            Phase::Teaching => self.teach_ids.len(),
            Phase::Testing => self.test_ids.len(),
            Phase::Tutorial | Phase::Done => 0,
        }
    }

    /// Phase the next issued item belongs to.
    pub fn active_phase(&self) -> Phase {
        match self.phase {
            Phase::Tutorial => Phase::Teaching,
            p => p,
        }
    }

    pub fn current_item(&self) -> Option<&str> {
        let ids = match self.active_phase() {
            Phase::Teaching => &self.teach_ids,
            Phase::Testing => &self.test_ids,
            _ => return None,
        };
        ids.get(self.cursor).map(String::as_str)
    }

    pub fn test_responses(&self) -> impl Iterator<Item = &ResponseRecord> {
        self.responses.iter().filter(|r| r.phase == Phase::Testing)
    }

    pub fn apply(&mut self, event: &Event) -> Result<(), String> {
        match event {
            Event::Created { .. } => Err("duplicate created event".into()),
            Event::Issued { phase, index, at } => {
                if self.phase == Phase::Done {
                    return Err("issue after completion".into());
                }
                if self.issued_at.is_some() {
                    return Err("issue while an item is outstanding".into());
                }
                if *phase != self.active_phase() || *index != self.cursor {
                    return Err(format!(
                        "issued {phase:?}[{index}], expected {:?}[{}]",
                        self.active_phase(),
                        self.cursor
                    ));
                }
                self.phase = *phase;
                self.issued_at = Some(*at);
                Ok(())
            }
            Event::Responded {
                phase,
                index,
                item_id,
                choice,
                correct,
                at,
            } => {
                if self.issued_at.is_none() {
                    return Err("response without an issued item".into());
                }
                if *phase != self.phase || *index != self.cursor {
                    return Err(format!(
                        "response to {phase:?}[{index}], expected {:?}[{}]",
                        self.phase, self.cursor
                    ));
                }
                if self.current_item() != Some(item_id.as_str()) {
                    return Err(format!("response names item '{item_id}'"));
                }
                if *choice >= self.button_order.len() {
                    return Err(format!("choice {choice} out of range"));
                }
                self.responses.push(ResponseRecord {
                    phase: *phase,
                    index: *index,
                    item_id: item_id.clone(),
                    choice: *choice,
                    correct: *correct,
                    at: *at,
                });
                self.issued_at = None;
                self.feedback_at = (*phase == Phase::Teaching).then_some(*at);
                self.cursor += 1;
                if self.cursor == self.phase_len(self.phase) {
                    self.cursor = 0;
                    self.phase = match self.phase {
                        Phase::Teaching => Phase::Testing,
                        _ => Phase::Done,
                    };
                }
                Ok(())
            }
        }
    }
}
