//! Community dataset files.
//!
//! Three comma-separated UTF-8 files describe a community:
//!
//! * profiles, with the header `external_id,created_at,private,klout,peerindex`;
//!   scores may be empty.
//! * edges, one `follower_id,followee_id` pair per line.
//! * tweets, one `tweet_id,author_id,timestamp,retweet_of,hashtags` record per
//!   line, hashtags joined by `;`. An optional sixth `reply_to` column is
//!   accepted.
//!
//! Edges and tweets files may start with a header line; it is recognised by
//! its first field (`follower_id` / `tweet_id`) and skipped. Timestamps are
//! ISO-8601 and are written back as `YYYY-MM-DDTHH:MM:SSZ`.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDateTime, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CommunityGraph, NodeId};

pub const PROFILES_FILE: &str = "profiles.csv";
pub const EDGES_FILE: &str = "edges.csv";
pub const TWEETS_FILE: &str = "tweets.csv";

const PROFILE_HEADER: [&str; 5] = ["external_id", "created_at", "private", "klout", "peerindex"];

/// Minimum account age (seconds) at tweet time for a tweet to be kept.
pub const MIN_ACCOUNT_AGE_SECS: i64 = 86_400;
/// Tweets carrying at least this many trending hashtags are dropped.
pub const MAX_TRENDING_TAGS: usize = 3;
/// Both influence scores must be at least this for a user to get a DI score.
pub const MIN_INFLUENCE_SCORE: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub external_id: String,
    /// Seconds since the Unix epoch, UTC.
    pub created_at: i64,
    pub is_private: bool,
    pub klout: Option<f64>,
    pub peerindex: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub author: String,
    pub timestamp: i64,
    pub retweet_of: Option<String>,
    pub hashtags: Vec<String>,
    pub reply_to: Option<String>,
}

/// Digital-influence score: the mean of the Klout and PeerIndex scores.
#[derive(Copy, Clone, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiScore(f64);

impl DiScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// DI score of a profile, or `None` when either score is missing or below
/// [`MIN_INFLUENCE_SCORE`].
pub fn compute_di(profile: &ProfileRecord) -> Option<DiScore> {
    match (profile.klout, profile.peerindex) {
        (Some(k), Some(p)) if k >= MIN_INFLUENCE_SCORE && p >= MIN_INFLUENCE_SCORE => {
            Some(DiScore((k + p) / 2.0))
        }
        _ => None,
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct LoadConfig {
    /// Keep private profiles instead of dropping them.
    pub keep_private: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub private_profiles: usize,
    pub dangling_edges: usize,
    pub self_loops: usize,
    pub duplicate_edges: usize,
    pub orphan_tweets: usize,
}

/// A loaded community. Node ids follow the order of the profiles file.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub graph: CommunityGraph,
    pub profiles: Vec<ProfileRecord>,
    pub di: Vec<Option<DiScore>>,
    pub tweets: Vec<TweetRecord>,
    index: HashMap<String, NodeId>,
}

impl Dataset {
    /// Assembles a dataset from profiles (in node order), follow pairs and
    /// tweets. Tweets whose author has no profile are an error.
    pub fn from_parts(
        profiles: Vec<ProfileRecord>,
        graph: CommunityGraph,
        tweets: Vec<TweetRecord>,
    ) -> Result<Self> {
        assert_eq!(profiles.len(), graph.node_count());
        let index = build_index(&profiles)?;
        if let Some(t) = tweets.iter().find(|t| !index.contains_key(&t.author)) {
            return Err(Error::UnknownAuthor(t.author.clone()));
        }
        let di = profiles.iter().map(compute_di).collect();
        Ok(Dataset {
            graph,
            profiles,
            di,
            tweets,
            index,
        })
    }

    pub fn node(&self, external_id: &str) -> Option<NodeId> {
        self.index.get(external_id).copied()
    }

    pub fn external_id(&self, u: NodeId) -> &str {
        &self.profiles[u.index()].external_id
    }

    /// Drops spam tweets in place; returns the number dropped.
    pub fn filter_spam(&mut self, trending: &HashSet<String>) -> Result<usize> {
        let (kept, dropped) = filter_spam(&self.tweets, &self.profiles, trending)?;
        self.tweets = kept;
        Ok(dropped)
    }

    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_profiles(&self.profiles, File::create(dir.join(PROFILES_FILE))?)?;
        write_edges(self, File::create(dir.join(EDGES_FILE))?)?;
        write_tweets(&self.tweets, File::create(dir.join(TWEETS_FILE))?)?;
        Ok(())
    }

    pub fn load_dir(dir: &Path, config: &LoadConfig) -> Result<(Self, LoadReport)> {
        load_dataset(
            &dir.join(PROFILES_FILE),
            &dir.join(EDGES_FILE),
            &dir.join(TWEETS_FILE),
            config,
        )
    }
}

fn build_index(profiles: &[ProfileRecord]) -> Result<HashMap<String, NodeId>> {
    let mut index = HashMap::with_capacity(profiles.len());
    for (i, p) in profiles.iter().enumerate() {
        if index
            .insert(p.external_id.clone(), NodeId(i as u32))
            .is_some()
        {
            return Err(Error::DuplicateId(p.external_id.clone()));
        }
    }
    Ok(index)
}

pub fn load_dataset(
    profile_path: &Path,
    edge_path: &Path,
    tweet_path: &Path,
    config: &LoadConfig,
) -> Result<(Dataset, LoadReport)> {
    let mut report = LoadReport::default();

    let all_profiles = read_profiles(File::open(profile_path)?, profile_path)?;
    // duplicates are detected before private users are removed
    build_index(&all_profiles)?;
    let profiles: Vec<ProfileRecord> = all_profiles
        .into_iter()
        .filter(|p| {
            let keep = config.keep_private || !p.is_private;
            if !keep {
                report.private_profiles += 1;
            }
            keep
        })
        .collect();
    let index = build_index(&profiles)?;

    let mut follows = Vec::new();
    for pair in read_edges(File::open(edge_path)?, edge_path)? {
        match (index.get(&pair.0), index.get(&pair.1)) {
            (Some(&a), Some(&b)) => follows.push((a, b)),
            _ => report.dangling_edges += 1,
        }
    }
    let (graph, built) = CommunityGraph::from_follows(profiles.len(), follows)?;
    report.self_loops = built.self_loops;
    report.duplicate_edges = built.duplicates;

    let mut tweets = read_tweets(File::open(tweet_path)?, tweet_path)?;
    tweets.retain(|t| {
        let known = index.contains_key(&t.author);
        if !known {
            report.orphan_tweets += 1;
        }
        known
    });
    if report.dangling_edges + report.self_loops + report.duplicate_edges + report.orphan_tweets > 0
    {
        log::warn!(
            "{}: dropped input records: {:?}",
            profile_path.display(),
            report
        );
    }

    let di = profiles.iter().map(compute_di).collect();
    Ok((
        Dataset {
            graph,
            profiles,
            di,
            tweets,
            index,
        },
        report,
    ))
}

/// Drops tweets posted less than a day after the author's account was
/// created, and tweets with three or more trending hashtags. Kept tweets
/// retain their order.
pub fn filter_spam(
    tweets: &[TweetRecord],
    profiles: &[ProfileRecord],
    trending: &HashSet<String>,
) -> Result<(Vec<TweetRecord>, usize)> {
    let created: HashMap<&str, i64> = profiles
        .iter()
        .map(|p| (p.external_id.as_str(), p.created_at))
        .collect();
    let trending: HashSet<String> = trending.iter().map(|t| t.to_lowercase()).collect();
    let mut kept = Vec::with_capacity(tweets.len());
    for t in tweets {
        let created_at = *created
            .get(t.author.as_str())
            .ok_or_else(|| Error::MissingProfile(t.author.clone()))?;
        let too_young = t.timestamp - created_at < MIN_ACCOUNT_AGE_SECS;
        let hot = t
            .hashtags
            .iter()
            .filter(|h| trending.contains(h.as_str()))
            .count();
        if !too_young && hot < MAX_TRENDING_TAGS {
            kept.push(t.clone());
        }
    }
    let dropped = tweets.len() - kept.len();
    Ok((kept, dropped))
}

/// Reads a newline-delimited hashtag list, lowercased; blank lines and a
/// leading `#` are ignored.
pub fn read_tag_list(path: &Path) -> Result<HashSet<String>> {
    let reader = BufReader::new(File::open(path)?);
    let mut tags = HashSet::new();
    for line in reader.lines() {
        let line = line?;
        let tag = line.trim().trim_start_matches('#');
        if !tag.is_empty() {
            tags.insert(tag.to_lowercase());
        }
    }
    Ok(tags)
}

pub fn parse_timestamp(s: &str) -> std::result::Result<i64, String> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(t.and_utc().timestamp());
        }
    }
    Err(format!("invalid ISO-8601 timestamp {s:?}"))
}

pub fn format_timestamp(secs: i64) -> String {
    Utc.timestamp_opt(secs, 0)
        .single()
        .map(|t| t.to_rfc3339_opts(SecondsFormat::Secs, true))
        .unwrap_or_else(|| secs.to_string())
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn csv_writer<W: Write>(writer: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer)
}

fn parse_error(path: &Path, record: &csv::StringRecord, message: impl Into<String>) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        line: record.position().map_or(0, |p| p.line() as usize),
        message: message.into(),
    }
}

fn parse_score(raw: &str) -> std::result::Result<Option<f64>, String> {
    if raw.is_empty() {
        return Ok(None);
    }
    let v: f64 = raw.parse().map_err(|_| format!("invalid score {raw:?}"))?;
    if !(1.0..=100.0).contains(&v) {
        return Err(format!("score {v} outside [1, 100]"));
    }
    Ok(Some(v))
}

pub fn read_profiles<R: Read>(reader: R, path: &Path) -> Result<Vec<ProfileRecord>> {
    let mut rdr = csv_reader(reader);
    let mut out = Vec::new();
    let mut first = true;
    for rec in rdr.records() {
        let rec = rec?;
        if first {
            first = false;
            if rec.iter().ne(PROFILE_HEADER) {
                return Err(parse_error(
                    path,
                    &rec,
                    format!("expected header {}", PROFILE_HEADER.join(",")),
                ));
            }
            continue;
        }
        if rec.len() != 5 {
            return Err(parse_error(
                path,
                &rec,
                format!("expected 5 fields, found {}", rec.len()),
            ));
        }
        let created_at = parse_timestamp(&rec[1]).map_err(|m| parse_error(path, &rec, m))?;
        let is_private = match &rec[2] {
            "0" => false,
            "1" => true,
            other => {
                return Err(parse_error(
                    path,
                    &rec,
                    format!("private flag must be 0 or 1, found {other:?}"),
                ))
            }
        };
        let klout = parse_score(&rec[3]).map_err(|m| parse_error(path, &rec, m))?;
        let peerindex = parse_score(&rec[4]).map_err(|m| parse_error(path, &rec, m))?;
        if rec[0].is_empty() {
            return Err(parse_error(path, &rec, "empty external_id"));
        }
        out.push(ProfileRecord {
            external_id: rec[0].to_string(),
            created_at,
            is_private,
            klout,
            peerindex,
        });
    }
    if first {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            message: "missing header line".into(),
        });
    }
    Ok(out)
}

pub fn read_edges<R: Read>(reader: R, path: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, rec) in csv_reader(reader).records().enumerate() {
        let rec = rec?;
        if i == 0 && rec.get(0) == Some("follower_id") {
            continue;
        }
        if rec.len() != 2 || rec[0].is_empty() || rec[1].is_empty() {
            return Err(parse_error(path, &rec, "expected follower_id,followee_id"));
        }
        out.push((rec[0].to_string(), rec[1].to_string()));
    }
    Ok(out)
}

pub fn read_tweets<R: Read>(reader: R, path: &Path) -> Result<Vec<TweetRecord>> {
    let mut out = Vec::new();
    for (i, rec) in csv_reader(reader).records().enumerate() {
        let rec = rec?;
        if i == 0 && rec.get(0) == Some("tweet_id") {
            continue;
        }
        if !(5..=6).contains(&rec.len()) {
            return Err(parse_error(
                path,
                &rec,
                format!("expected 5 or 6 fields, found {}", rec.len()),
            ));
        }
        let timestamp = parse_timestamp(&rec[2]).map_err(|m| parse_error(path, &rec, m))?;
        if timestamp <= 0 {
            return Err(parse_error(path, &rec, "timestamp must be positive"));
        }
        let optional = |s: &str| (!s.is_empty()).then(|| s.to_string());
        let retweet_of = optional(&rec[3]);
        if retweet_of.as_deref() == Some(&rec[0]) {
            return Err(parse_error(path, &rec, "tweet retweets itself"));
        }
        if rec[0].is_empty() || rec[1].is_empty() {
            return Err(parse_error(path, &rec, "empty tweet_id or author_id"));
        }
        out.push(TweetRecord {
            tweet_id: rec[0].to_string(),
            author: rec[1].to_string(),
            timestamp,
            retweet_of,
            hashtags: rec[4]
                .split(';')
                .map(|h| h.trim().trim_start_matches('#').to_lowercase())
                .filter(|h| !h.is_empty())
                .collect(),
            reply_to: rec.get(5).and_then(optional),
        });
    }
    Ok(out)
}

fn fmt_score(s: Option<f64>) -> String {
    s.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_profiles<W: Write>(profiles: &[ProfileRecord], writer: W) -> Result<()> {
    let mut w = csv_writer(writer);
    w.write_record(PROFILE_HEADER)?;
    for p in profiles {
        w.write_record([
            p.external_id.clone(),
            format_timestamp(p.created_at),
            if p.is_private { "1" } else { "0" }.to_string(),
            fmt_score(p.klout),
            fmt_score(p.peerindex),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_edges<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut w = csv_writer(writer);
    for (follower, followee) in dataset.graph.follow_pairs() {
        w.write_record([dataset.external_id(follower), dataset.external_id(followee)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_tweets<W: Write>(tweets: &[TweetRecord], writer: W) -> Result<()> {
    let mut w = csv_writer(writer);
    for t in tweets {
        let mut fields = vec![
            t.tweet_id.clone(),
            t.author.clone(),
            format_timestamp(t.timestamp),
            t.retweet_of.clone().unwrap_or_default(),
            t.hashtags.join(";"),
        ];
        if let Some(r) = &t.reply_to {
            fields.push(r.clone());
        }
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}
