use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{Receiver, RecvTimeoutError, Sender};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use crate::error::{Error, Result};
use crate::kernels::Region;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Coefficient,
    MassTrans(usize),
    Forward(usize),
    Backward(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Tag {
    pub level: usize,
    pub phase: Phase,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Descriptor {
    /// Values of a box, in natural order of that box.
    Face(Region),
    /// Sweep state for the chain whose segment after (forward) or before
    /// (backward) the sender's is `segment`; absent past an empty prefix.
    Carry { segment: Region, present: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExchangeMessage<T> {
    pub sender: usize,
    pub receiver: usize,
    pub tag: Tag,
    pub descriptor: Descriptor,
    pub payload: Vec<T>,
}

impl<T> ExchangeMessage<T> {
    /// Payload length agrees with the descriptor.
    pub fn is_consistent(&self) -> bool {
        match &self.descriptor {
            Descriptor::Face(r) => r.len() == self.payload.len(),
            Descriptor::Carry { present: false, .. } => self.payload.is_empty(),
            Descriptor::Carry { .. } => true,
        }
    }
}

/// Set once any worker fails; every blocking wait checks it.
#[derive(Debug, Default)]
pub(crate) struct AbortFlag(AtomicBool);

impl AbortFlag {
    pub(crate) fn raise(&self) {
        self.0.store(true, Ordering::SeqCst);
    }

    pub(crate) fn is_raised(&self) -> bool {
        self.0.load(Ordering::SeqCst)
    }
}

fn aborted(worker: usize) -> Error {
    Error::WorkerFailed {
        worker,
        reason: "aborted after another worker failed".into(),
    }
}

/// Phase barrier that releases everyone with an error once aborted.
#[derive(Debug)]
pub(crate) struct Barrier {
    parties: usize,
    state: Mutex<(usize, u64)>,
    cv: Condvar,
    abort: Arc<AbortFlag>,
}

impl Barrier {
    pub(crate) fn new(parties: usize, abort: Arc<AbortFlag>) -> Self {
        Self {
            parties,
            state: Mutex::new((0, 0)),
            cv: Condvar::new(),
            abort,
        }
    }

    pub(crate) fn wait(&self, worker: usize) -> Result<()> {
        let mut st = self.state.lock().expect("barrier lock");
        let gen = st.1;
        st.0 += 1;
        if st.0 == self.parties {
            st.0 = 0;
            st.1 += 1;
            self.cv.notify_all();
            return Ok(());
        }
        while st.1 == gen {
            if self.abort.is_raised() {
                return Err(aborted(worker));
            }
            st = self.cv.wait_timeout(st, Duration::from_millis(20)).expect("barrier lock").0;
        }
        Ok(())
    }

    pub(crate) fn wake_all(&self) {
        let _guard = self.state.lock();
        self.cv.notify_all();
    }
}

/// One worker's endpoint: senders to everyone plus its own receiver and a
/// buffer of messages that arrived ahead of the phase asking for them.
pub(crate) struct Mailbox<T> {
    pub(crate) id: usize,
    senders: Vec<Sender<ExchangeMessage<T>>>,
    inbox: Receiver<ExchangeMessage<T>>,
    pending: Vec<ExchangeMessage<T>>,
    abort: Arc<AbortFlag>,
}

impl<T> Mailbox<T> {
    pub(crate) fn network(workers: usize, abort: &Arc<AbortFlag>) -> Vec<Mailbox<T>> {
        let (senders, inboxes): (Vec<_>, Vec<_>) =
            (0..workers).map(|_| std::sync::mpsc::channel()).unzip();
        inboxes
            .into_iter()
            .enumerate()
            .map(|(id, inbox)| Mailbox {
                id,
                senders: senders.clone(),
                inbox,
                pending: Vec::new(),
                abort: abort.clone(),
            })
            .collect()
    }

    pub(crate) fn send(&self, msg: ExchangeMessage<T>) -> Result<()> {
        debug_assert!(msg.is_consistent());
        self.senders[msg.receiver].send(msg).map_err(|_| Error::WorkerFailed {
            worker: self.id,
            reason: "aborted: receiver hung up".into(),
        })
    }

    /// Next message satisfying `want`, buffering any others.
    pub(crate) fn recv(&mut self, want: impl Fn(&ExchangeMessage<T>) -> bool) -> Result<ExchangeMessage<T>> {
        if let Some(i) = self.pending.iter().position(&want) {
            return Ok(self.pending.swap_remove(i));
        }
        loop {
            if self.abort.is_raised() {
                return Err(aborted(self.id));
            }
            match self.inbox.recv_timeout(Duration::from_millis(20)) {
                Ok(m) if want(&m) => return Ok(m),
                Ok(m) => self.pending.push(m),
                Err(RecvTimeoutError::Timeout) => {}
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(Error::WorkerFailed {
                        worker: self.id,
                        reason: "aborted: all senders disconnected".into(),
                    })
                }
            }
        }
    }
}
