//! Fair lazy streams.
//!
//! A stream yields `Some(x)` for an element and `None` for a tick: a step of
//! bounded work that produced nothing (a filtered-out candidate, an index
//! that is still being opened). Ticks keep every consumer in control of how
//! much work it spends, even when a filter would otherwise search forever.
//! The iterator ending means the stream is exhausted for good.

use std::cell::RefCell;
use std::collections::VecDeque;
use std::rc::Rc;
use std::sync::Arc;

pub type Stream<T = crate::Elem> = Box<dyn Iterator<Item = Option<T>>>;

pub fn from_iter<T: 'static, I>(it: I) -> Stream<T>
where
    I: IntoIterator<Item = T>,
    I::IntoIter: 'static,
{
    Box::new(it.into_iter().map(Some))
}

pub fn empty<T: 'static>() -> Stream<T> {
    Box::new(std::iter::empty())
}

/// Keeps elements passing `keep`, turning the rest into ticks.
pub fn filter<T: 'static>(s: Stream<T>, keep: impl Fn(&T) -> bool + 'static) -> Stream<T> {
    Box::new(s.map(move |o| o.filter(|x| keep(x))))
}

pub fn map<T: 'static, U: 'static>(s: Stream<T>, f: impl Fn(T) -> U + 'static) -> Stream<U> {
    Box::new(s.map(move |o| o.map(&f)))
}

pub fn filter_map<T: 'static, U: 'static>(
    s: Stream<T>,
    f: impl Fn(T) -> Option<U> + 'static,
) -> Stream<U> {
    Box::new(s.map(move |o| o.and_then(&f)))
}

/// Replaces each element by a finite batch, emitted one per step.
pub fn expand<T: 'static, U: 'static>(s: Stream<T>, f: impl Fn(T) -> Vec<U> + 'static) -> Stream<U> {
    let mut inner = s;
    let mut buf: VecDeque<U> = VecDeque::new();
    Box::new(std::iter::from_fn(move || {
        if let Some(u) = buf.pop_front() {
            return Some(Some(u));
        }
        match inner.next()? {
            None => Some(None),
            Some(t) => {
                buf.extend(f(t));
                Some(buf.pop_front())
            }
        }
    }))
}

pub fn chain<T: 'static>(a: Stream<T>, b: Stream<T>) -> Stream<T> {
    Box::new(a.chain(b))
}

/// Fair interleaving of a stream of streams. Each round opens at most one new
/// inner stream and pulls one step from every open one.
pub fn dovetail<T: 'static>(outer: Stream<Stream<T>>) -> Stream<T> {
    let mut outer = Some(outer);
    let mut active: Vec<Stream<T>> = Vec::new();
    let mut cursor = 0usize;
    Box::new(std::iter::from_fn(move || {
        if cursor >= active.len() {
            cursor = 0;
            if let Some(o) = outer.as_mut() {
                match o.next() {
                    None => outer = None,
                    Some(Some(s)) => active.push(s),
                    Some(None) => {}
                }
                if active.is_empty() {
                    return if outer.is_some() { Some(None) } else { None };
                }
            } else if active.is_empty() {
                return None;
            }
        }
        match active[cursor].next() {
            // Closing a stream counts as a step, so that a run of empty
            // inner streams still ticks.
            None => {
                drop(active.remove(cursor));
                Some(None)
            }
            Some(step) => {
                cursor += 1;
                Some(step)
            }
        }
    }))
}

/// Fair walk of a tree: every emitted node opens the stream of its children,
/// and all open child streams are served round-robin.
pub fn tree<T: Clone + 'static>(
    roots: Vec<T>,
    children: Arc<dyn Fn(&T) -> Stream<T>>,
) -> Stream<T> {
    let mut pending: VecDeque<T> = roots.into();
    let mut active: Vec<Stream<T>> = Vec::new();
    let mut cursor = 0usize;
    Box::new(std::iter::from_fn(move || {
        if let Some(r) = pending.pop_front() {
            active.push(children(&r));
            return Some(Some(r));
        }
        loop {
            if active.is_empty() {
                return None;
            }
            if cursor >= active.len() {
                cursor = 0;
            }
            match active[cursor].next() {
                None => {
                    drop(active.remove(cursor));
                }
                Some(None) => {
                    cursor += 1;
                    return Some(None);
                }
                Some(Some(x)) => {
                    cursor += 1;
                    active.push(children(&x));
                    return Some(Some(x));
                }
            }
        }
    }))
}

/// Caches a stream so it can be replayed from the start any number of times.
/// Replays share the underlying work: each source step is paid once.
pub fn replay<T: Clone + 'static>(s: Stream<T>) -> impl Fn() -> Stream<T> + Clone {
    struct Shared<T> {
        src: Option<Stream<T>>,
        seen: Vec<T>,
    }
    let shared = Rc::new(RefCell::new(Shared { src: Some(s), seen: Vec::new() }));
    move || {
        let shared = shared.clone();
        let mut pos = 0usize;
        Box::new(std::iter::from_fn(move || {
            let mut sh = shared.borrow_mut();
            if pos < sh.seen.len() {
                pos += 1;
                return Some(Some(sh.seen[pos - 1].clone()));
            }
            match sh.src.as_mut()?.next() {
                None => {
                    sh.src = None;
                    None
                }
                Some(None) => Some(None),
                Some(Some(x)) => {
                    sh.seen.push(x.clone());
                    pos += 1;
                    Some(Some(x))
                }
            }
        })) as Stream<T>
    }
}

/// Collects up to `k` elements, spending at most `max_steps` steps. The flag
/// reports whether the stream was exhausted.
pub fn take<T>(s: &mut Stream<T>, k: usize, max_steps: usize) -> (Vec<T>, bool) {
    let mut out = Vec::new();
    let mut steps = 0;
    while out.len() < k && steps < max_steps {
        steps += 1;
        match s.next() {
            None => return (out, true),
            Some(Some(x)) => out.push(x),
            Some(None) => {}
        }
    }
    (out, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naturals_from(start: u64) -> Stream<u64> {
        from_iter(start..)
    }

    #[test]
    fn dovetail_reaches_every_stream() {
        let outer: Stream<Stream<u64>> = from_iter((0u64..).map(|i| naturals_from(i * 1000)));
        let mut s = dovetail(outer);
        let (got, _) = take(&mut s, 200, 10_000);
        assert!(got.contains(&0));
        assert!(got.contains(&5000));
        assert!(got.contains(&2003));
    }

    #[test]
    fn dovetail_of_finite_streams_ends() {
        let outer: Stream<Stream<u64>> = from_iter(vec![from_iter(0u64..3), from_iter(10u64..12)]);
        let mut s = dovetail(outer);
        let (mut got, done) = take(&mut s, 100, 100);
        got.sort();
        assert!(done);
        assert_eq!(got, vec![0, 1, 2, 10, 11]);
    }

    #[test]
    fn filter_ticks_instead_of_hanging() {
        let mut s = filter(naturals_from(0), |&x| x == 3);
        let (got, done) = take(&mut s, 2, 50);
        assert_eq!(got, vec![3]);
        assert!(!done);
    }

    #[test]
    fn tree_walk_of_binary_strings() {
        let kids: Arc<dyn Fn(&Vec<u8>) -> Stream<Vec<u8>>> = Arc::new(|v: &Vec<u8>| {
            if v.len() >= 3 {
                return empty();
            }
            let (mut a, mut b) = (v.clone(), v.clone());
            a.push(0);
            b.push(1);
            from_iter(vec![a, b])
        });
        let mut s = tree(vec![vec![]], kids);
        let (got, done) = take(&mut s, 100, 1000);
        assert!(done);
        assert_eq!(got.len(), 15);
    }
}
