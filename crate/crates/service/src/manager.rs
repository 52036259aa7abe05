use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use vistutor_core::model::{load_dataset, load_teaching_set, split_dataset};
use vistutor_core::{Dataset, Strategy, TeachingSet};

use crate::config::ServiceConfig;
use crate::error::{Result, ServiceError};
use crate::log::{append, log_path, read_events, replay_score};
use crate::session::{Event, Phase, Session};

/// Millisecond wall clock, injectable so timing rules can be tested.
pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0)
    }
}

/// A clock that only moves when told to.
#[derive(Default)]
pub struct ManualClock(AtomicU64);

impl ManualClock {
    pub fn new(start_ms: u64) -> Self {
        ManualClock(AtomicU64::new(start_ms))
    }

    pub fn advance(&self, ms: u64) {
        self.0.fetch_add(ms, Ordering::SeqCst);
    }

    pub fn set(&self, ms: u64) {
        self.0.store(ms, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now_ms(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct CreateRequest {
    /// A strategy name, or "random" for uniform assignment.
    pub strategy: String,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionDescriptor {
    pub session_id: String,
    pub strategy: Strategy,
    pub phase: Phase,
    pub teach_len: usize,
    pub test_len: usize,
    pub alternate_ms: u64,
    pub min_wait_ms: u64,
    pub tutorial: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ButtonOption {
    pub choice: usize,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemPayload {
    pub index: usize,
    pub total: usize,
    pub image_uri: Option<String>,
    pub options: Vec<ButtonOption>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "lowercase")]
pub enum NextPayload {
    Teaching(ItemPayload),
    Testing(ItemPayload),
    Done { score: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationGrid {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeachingFeedback {
    pub index: usize,
    pub correct: bool,
    pub correct_class: ButtonOption,
    pub show_explanation: bool,
    pub explanation: Option<ExplanationGrid>,
    pub alternate_ms: u64,
    pub min_wait_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Feedback {
    Teaching(TeachingFeedback),
    Testing { acknowledged: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub phase: Phase,
    pub index: usize,
    pub item_id: String,
    pub true_class: usize,
    pub choice: usize,
    pub correct: bool,
    pub at: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionResult {
    pub session_id: String,
    pub strategy: Strategy,
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    pub classes: Vec<String>,
    /// `confusion[truth][choice]` over the test responses.
    pub confusion: Vec<Vec<u64>>,
    pub records: Vec<ResultRecord>,
}

/// Owns the dataset, the per-strategy teaching sequences and every session.
pub struct SessionManager {
    cfg: ServiceConfig,
    ds: Dataset,
    teaching: BTreeMap<Strategy, Vec<String>>,
    test_pool: Vec<String>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    created: Mutex<u64>,
    clock: Arc<dyn Clock>,
}

fn lock(m: &Mutex<Session>) -> MutexGuard<'_, Session> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl SessionManager {
    /// Loads the dataset and teaching sets named in `cfg`.
    pub fn open(cfg: ServiceConfig, clock: Arc<dyn Clock>) -> Result<Self> {
        let ds = load_dataset(&cfg.dataset)?;
        let mut sets = BTreeMap::new();
        for (&strategy, path) in &cfg.teaching_sets {
            sets.insert(strategy, load_teaching_set(path)?);
        }
        SessionManager::new(cfg, ds, sets, clock)
    }

    pub fn new(
        cfg: ServiceConfig,
        ds: Dataset,
        sets: BTreeMap<Strategy, TeachingSet>,
        clock: Arc<dyn Clock>,
    ) -> Result<Self> {
        cfg.validate()?;
        if sets.is_empty() {
            return Err(ServiceError::Config("no teaching sets configured".into()));
        }
        let mut teaching = BTreeMap::new();
        for (strategy, ts) in sets {
            if ts.item_ids.len() < cfg.teach_len {
                return Err(ServiceError::Config(format!(
                    "{strategy} teaching set has {} items, teach_len is {}",
                    ts.item_ids.len(),
                    cfg.teach_len
                )));
            }
            let ids: Vec<String> = ts.item_ids[..cfg.teach_len].to_vec();
            for pos in ds.positions(&ids)? {
                if strategy.shows_explanation() && ds.item(pos).explanation.is_none() {
                    return Err(ServiceError::Config(format!(
                        "{strategy} teaches '{}' which has no explanation",
                        ds.item(pos).id
                    )));
                }
            }
            teaching.insert(strategy, ids);
        }

        let candidates = match &cfg.test_ids {
            Some(ids) => {
                ds.positions(ids)?;
                ids.clone()
            }
            None => {
                let seed = cfg.split_seed.unwrap_or(cfg.seed);
                split_dataset(&ds, cfg.train_fraction, seed)?.test
            }
        };
        let test_pool: Vec<String> = candidates
            .into_iter()
            .filter(|id| !teaching.values().any(|t| t.contains(id)))
            .collect();
        if test_pool.len() < cfg.test_len {
            return Err(ServiceError::Config(format!(
                "test pool has {} items outside the teaching sets, test_len is {}",
                test_pool.len(),
                cfg.test_len
            )));
        }

        std::fs::create_dir_all(&cfg.data_dir)?;
        let manager = SessionManager {
            cfg,
            ds,
            teaching,
            test_pool,
            sessions: RwLock::new(HashMap::new()),
            created: Mutex::new(0),
            clock,
        };
        manager.restore()?;
        Ok(manager)
    }

    fn restore(&self) -> Result<()> {
        let mut paths: Vec<_> = std::fs::read_dir(&self.cfg.data_dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        let mut map = self.sessions.write().unwrap_or_else(|e| e.into_inner());
        for path in &paths {
            let bad = |reason: String| ServiceError::Log {
                path: path.display().to_string(),
                reason,
            };
            let events = read_events(path)?;
            let session = Session::fold(&events).map_err(bad)?;
            for id in session.teach_ids.iter().chain(&session.test_ids) {
                if self.ds.position(id).is_none() {
                    return Err(bad(format!("unknown item '{id}'")));
                }
            }
            map.insert(session.id.clone(), Arc::new(Mutex::new(session)));
        }
        *self.created.lock().unwrap_or_else(|e| e.into_inner()) = map.len() as u64;
        Ok(())
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.cfg
    }

    pub fn dataset(&self) -> &Dataset {
        &self.ds
    }

    pub fn strategies(&self) -> Vec<Strategy> {
        self.teaching.keys().copied().collect()
    }

    pub fn test_pool(&self) -> &[String] {
        &self.test_pool
    }

    pub fn session_ids(&self) -> Vec<String> {
        let map = self.sessions.read().unwrap_or_else(|e| e.into_inner());
        let mut ids: Vec<String> = map.keys().cloned().collect();
        ids.sort();
        ids
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>> {
        let map = self.sessions.read().unwrap_or_else(|e| e.into_inner());
        map.get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    /// Copy of a session's current state.
    pub fn snapshot(&self, id: &str) -> Result<Session> {
        let handle = self.session(id)?;
        let s = lock(&handle).clone();
        Ok(s)
    }

    fn descriptor(&self, s: &Session) -> SessionDescriptor {
        SessionDescriptor {
            session_id: s.id.clone(),
            strategy: s.strategy,
            phase: s.phase,
            teach_len: s.teach_ids.len(),
            test_len: s.test_ids.len(),
            alternate_ms: self.cfg.alternate_ms,
            min_wait_ms: self.cfg.min_wait_ms,
            tutorial: self.cfg.tutorial.clone(),
        }
    }

    pub fn create(&self, req: &CreateRequest) -> Result<SessionDescriptor> {
        let requested = if req.strategy.trim().eq_ignore_ascii_case("random") {
            None
        } else {
            let st: Strategy = req
                .strategy
                .parse()
                .map_err(|_| ServiceError::UnknownStrategy(req.strategy.clone()))?;
            if !self.teaching.contains_key(&st) {
                return Err(ServiceError::UnknownStrategy(req.strategy.clone()));
            }
            Some(st)
        };

        let mut counter = self.created.lock().unwrap_or_else(|e| e.into_inner());
        let mut id_rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        id_rng.set_stream(*counter);
        *counter += 1;
        drop(counter);
        let session_id = format!("{:016x}", id_rng.random::<u64>());
        let mut rng = match req.seed {
            Some(s) => ChaCha8Rng::seed_from_u64(s),
            None => id_rng,
        };

        let strategy = match requested {
            Some(st) => st,
            None => {
                let all = self.strategies();
                all[rng.random_range(0..all.len())]
            }
        };
        let mut test_ids = self.test_pool.clone();
        test_ids.shuffle(&mut rng);
        test_ids.truncate(self.cfg.test_len);
        let mut button_order: Vec<usize> = (0..self.ds.num_classes()).collect();
        button_order.shuffle(&mut rng);

        let event = Event::Created {
            session_id: session_id.clone(),
            strategy,
            teach_ids: self.teaching[&strategy].clone(),
            test_ids,
            button_order,
            at: self.clock.now_ms(),
        };
        let session = Session::from_created(&event).map_err(ServiceError::Conflict)?;

        let mut map = self.sessions.write().unwrap_or_else(|e| e.into_inner());
        if map.contains_key(&session_id) {
            return Err(ServiceError::Conflict(format!(
                "session '{session_id}' exists"
            )));
        }
        append(&log_path(&self.cfg.data_dir, &session_id), &event)?;
        let descriptor = self.descriptor(&session);
        map.insert(session_id, Arc::new(Mutex::new(session)));
        Ok(descriptor)
    }

    fn options(&self, s: &Session) -> Vec<ButtonOption> {
        s.button_order
            .iter()
            .map(|&c| ButtonOption {
                choice: c,
                name: self.ds.classes()[c].clone(),
            })
            .collect()
    }

    fn image_uri(&self, item_id: &str) -> Option<String> {
        let pos = self.ds.position(item_id)?;
        let uri = self.ds.item(pos).image_uri.as_deref()?;
        if uri.starts_with('/') || uri.contains("://") {
            Some(uri.to_string())
        } else {
            Some(format!("/assets/{uri}"))
        }
    }

    fn score(s: &Session) -> (usize, usize) {
        let right = s.test_responses().filter(|r| r.correct).count();
        (right, s.test_ids.len())
    }

    /// The item currently awaiting an answer, issuing it if necessary.
    /// Repeated calls without a response return the same payload.
    pub fn next(&self, id: &str) -> Result<NextPayload> {
        let handle = self.session(id)?;
        let mut s = lock(&handle);
        if s.phase == Phase::Done {
            let (right, total) = Self::score(&s);
            return Ok(NextPayload::Done {
                score: right as f64 / total as f64,
            });
        }
        if s.issued_at.is_none() {
            let event = Event::Issued {
                phase: s.active_phase(),
                index: s.cursor,
                at: self.clock.now_ms(),
            };
            append(&log_path(&self.cfg.data_dir, id), &event)?;
            s.apply(&event).map_err(ServiceError::Conflict)?;
        }
        let item = s.current_item().expect("issued item exists");
        let payload = ItemPayload {
            index: s.cursor,
            total: s.phase_len(s.phase),
            image_uri: self.image_uri(item),
            options: self.options(&s),
        };
        Ok(match s.phase {
            Phase::Teaching => NextPayload::Teaching(payload),
            _ => NextPayload::Testing(payload),
        })
    }

    pub fn respond(&self, id: &str, index: usize, choice: usize) -> Result<Feedback> {
        let handle = self.session(id)?;
        let mut s = lock(&handle);
        if s.phase == Phase::Done {
            return Err(ServiceError::Conflict("session is finished".into()));
        }
        if s.issued_at.is_none() {
            return Err(ServiceError::Conflict(
                "no item issued, call next first".into(),
            ));
        }
        if index != s.cursor {
            return Err(ServiceError::Conflict(format!(
                "stale index {index}, expected {}",
                s.cursor
            )));
        }
        let classes = self.ds.num_classes();
        if choice >= classes {
            return Err(ServiceError::InvalidChoice { choice, classes });
        }
        let now = self.clock.now_ms();
        if let Some(fed) = s.feedback_at {
            let elapsed = now.saturating_sub(fed);
            if elapsed < self.cfg.min_wait_ms {
                return Err(ServiceError::TooFast {
                    elapsed_ms: elapsed,
                    min_wait_ms: self.cfg.min_wait_ms,
                });
            }
        }

        let item_id = s.current_item().expect("issued item exists").to_string();
        let item = self
            .ds
            .item(self.ds.position(&item_id).expect("validated id"));
        let phase = s.phase;
        let correct = item.class_index == choice;
        let event = Event::Responded {
            phase,
            index,
            item_id,
            choice,
            correct,
            at: now,
        };
        append(&log_path(&self.cfg.data_dir, id), &event)?;
        s.apply(&event).map_err(ServiceError::Conflict)?;

        if phase != Phase::Teaching {
            return Ok(Feedback::Testing { acknowledged: true });
        }
        let show = s.strategy.shows_explanation();
        Ok(Feedback::Teaching(TeachingFeedback {
            index,
            correct,
            correct_class: ButtonOption {
                choice: item.class_index,
                name: self.ds.classes()[item.class_index].clone(),
            },
            show_explanation: show,
            explanation: item
                .explanation
                .as_ref()
                .filter(|_| show)
                .map(|e| ExplanationGrid {
                    width: e.width,
                    height: e.height,
                    values: e.values.clone(),
                }),
            alternate_ms: self.cfg.alternate_ms,
            min_wait_ms: self.cfg.min_wait_ms,
        }))
    }

    pub fn result(&self, id: &str) -> Result<SessionResult> {
        let s = self.snapshot(id)?;
        if s.phase != Phase::Done {
            return Err(ServiceError::NotFinished);
        }
        let c = self.ds.num_classes();
        let mut confusion = vec![vec![0u64; c]; c];
        let records: Vec<ResultRecord> = s
            .responses
            .iter()
            .map(|r| {
                let truth = self
                    .ds
                    .item(self.ds.position(&r.item_id).expect("validated id"))
                    .class_index;
                if r.phase == Phase::Testing {
                    confusion[truth][r.choice] += 1;
                }
                ResultRecord {
                    phase: r.phase,
                    index: r.index,
                    item_id: r.item_id.clone(),
                    true_class: truth,
                    choice: r.choice,
                    correct: r.correct,
                    at: r.at,
                }
            })
            .collect();
        let (right, total) = Self::score(&s);
        Ok(SessionResult {
            session_id: s.id.clone(),
            strategy: s.strategy,
            accuracy: right as f64 / total as f64,
            correct: right,
            total,
            classes: self.ds.classes().to_vec(),
            confusion,
            records,
        })
    }

    /// Re-derives a finished session's score from its log file alone.
    pub fn verify(&self, id: &str) -> Result<f64> {
        self.session(id)?;
        let path = log_path(&self.cfg.data_dir, id);
        let events = read_events(&path)?;
        replay_score(&events, &self.ds).map_err(|reason| ServiceError::Log {
            path: path.display().to_string(),
            reason,
        })
    }

    pub fn data_dir(&self) -> &Path {
        &self.cfg.data_dir
    }
}
