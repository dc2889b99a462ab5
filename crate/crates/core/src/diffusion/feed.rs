use std::collections::VecDeque;

use super::MemeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Message {
    pub meme: MemeId,
    pub created_step: u64,
}

/// Newest-first bounded queue; pushing past capacity drops the oldest.
#[derive(Debug, Clone)]
pub struct Feed {
    entries: VecDeque<Message>,
    capacity: usize,
}

impl Feed {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "feed capacity must be >= 1");
        Feed {
            entries: VecDeque::with_capacity(capacity.min(1024)),
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds `msg` on top; returns the evicted message, if any.
    pub fn push(&mut self, msg: Message) -> Option<Message> {
        self.entries.push_front(msg);
        if self.entries.len() > self.capacity {
            self.entries.pop_back()
        } else {
            None
        }
    }

    /// Newest first.
    pub fn iter(&self) -> impl Iterator<Item = &Message> {
        self.entries.iter()
    }

    /// The `depth` newest messages.
    pub fn top(&self, depth: usize) -> impl Iterator<Item = &Message> + Clone {
        self.entries.iter().take(depth)
    }

    pub fn newest(&self) -> Option<&Message> {
        self.entries.front()
    }
}
