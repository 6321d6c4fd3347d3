use std::io::{self, Write};
use std::time::{Duration, Instant};

use crate::graph::VertexId;
use crate::query::Path;

/// Returned by a sink to keep going or end the enumeration early.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Consumer of enumeration results.
///
/// `emit` is called once per result, in the order results are found.
/// Enumerators also call `poll` periodically while searching, which lets a
/// sink stop a search that runs long without producing results.
pub trait PathSink {
    fn emit(&mut self, path: &[VertexId]) -> Flow;

    fn poll(&mut self) -> Flow {
        Flow::Continue
    }
}

impl<S: PathSink + ?Sized> PathSink for &mut S {
    fn emit(&mut self, path: &[VertexId]) -> Flow {
        (**self).emit(path)
    }

    fn poll(&mut self) -> Flow {
        (**self).poll()
    }
}

/// Counters reported by every enumerator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Results handed to the sink.
    pub emitted: u64,
    /// Search-tree nodes generated, i.e. partial results extended by one vertex.
    pub expansions: u64,
    /// True when the sink ended the search before it was exhausted.
    pub stopped: bool,
}

/// Counts results and discards them.
#[derive(Debug, Default, Clone)]
pub struct CountSink {
    pub count: u64,
}

impl PathSink for CountSink {
    fn emit(&mut self, _path: &[VertexId]) -> Flow {
        self.count += 1;
        Flow::Continue
    }
}

/// Collects results, optionally stopping after the first `limit`.
#[derive(Debug, Default, Clone)]
pub struct CollectSink {
    pub paths: Vec<Path>,
    limit: Option<usize>,
}

impl CollectSink {
    pub fn unbounded() -> Self {
        Self::default()
    }

    pub fn first(limit: usize) -> Self {
        Self {
            paths: Vec::new(),
            limit: Some(limit),
        }
    }

    pub fn into_sorted(self) -> Vec<Path> {
        crate::query::canonicalize(self.paths)
    }
}

impl PathSink for CollectSink {
    fn emit(&mut self, path: &[VertexId]) -> Flow {
        if self.limit.is_some_and(|l| self.paths.len() >= l) {
            return Flow::Stop;
        }
        self.paths.push(path.to_vec());
        if self.limit.is_some_and(|l| self.paths.len() >= l) {
            Flow::Stop
        } else {
            Flow::Continue
        }
    }
}

/// Writes one path per line as space-separated external vertex ids.
pub struct WriterSink<'a, W: Write> {
    out: W,
    external_ids: &'a [u64],
    pub count: u64,
    error: Option<io::Error>,
    line: String,
}

impl<'a, W: Write> WriterSink<'a, W> {
    pub fn new(out: W, external_ids: &'a [u64]) -> Self {
        Self {
            out,
            external_ids,
            count: 0,
            error: None,
            line: String::new(),
        }
    }

    /// Flushes the writer and surfaces the first write error, if any.
    pub fn finish(mut self) -> io::Result<u64> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.count)
    }
}

impl<W: Write> PathSink for WriterSink<'_, W> {
    fn emit(&mut self, path: &[VertexId]) -> Flow {
        use std::fmt::Write as _;
        self.line.clear();
        for (i, &v) in path.iter().enumerate() {
            if i > 0 {
                self.line.push(' ');
            }
            let _ = write!(self.line, "{}", self.external_ids[v as usize]);
        }
        self.line.push('\n');
        match self.out.write_all(self.line.as_bytes()) {
            Ok(()) => {
                self.count += 1;
                Flow::Continue
            }
            Err(e) => {
                self.error = Some(e);
                Flow::Stop
            }
        }
    }
}

/// Adapts a closure into a sink.
pub struct FnSink<F>(pub F);

impl<F: FnMut(&[VertexId]) -> Flow> PathSink for FnSink<F> {
    fn emit(&mut self, path: &[VertexId]) -> Flow {
        (self.0)(path)
    }
}

/// Stops the wrapped sink once a wall-clock deadline passes.
pub struct Deadline<S> {
    inner: S,
    deadline: Instant,
    timed_out: bool,
    since_check: u32,
}

impl<S> Deadline<S> {
    const EMITS_PER_CHECK: u32 = 64;

    pub fn new(inner: S, limit: Duration) -> Self {
        Self::until(inner, Instant::now() + limit)
    }

    pub fn until(inner: S, deadline: Instant) -> Self {
        Self {
            inner,
            deadline,
            timed_out: false,
            since_check: 0,
        }
    }

    pub fn timed_out(&self) -> bool {
        self.timed_out
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    pub fn into_inner(self) -> S {
        self.inner
    }

    fn check(&mut self) -> Flow {
        if Instant::now() >= self.deadline {
            self.timed_out = true;
            Flow::Stop
        } else {
            Flow::Continue
        }
    }
}

impl<S: PathSink> PathSink for Deadline<S> {
    fn emit(&mut self, path: &[VertexId]) -> Flow {
        if self.timed_out {
            return Flow::Stop;
        }
        if self.inner.emit(path) == Flow::Stop {
            return Flow::Stop;
        }
        self.since_check += 1;
        if self.since_check >= Self::EMITS_PER_CHECK {
            self.since_check = 0;
            return self.check();
        }
        Flow::Continue
    }

    fn poll(&mut self) -> Flow {
        if self.inner.poll() == Flow::Stop {
            return Flow::Stop;
        }
        self.check()
    }
}
