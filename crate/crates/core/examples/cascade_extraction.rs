//! Rebuilding cascades from raw tweets and retweets.

use fi_diffusion::cascade::{extract_cascades, write_cascade_log, DEFAULT_WINDOW_SECS};
use fi_diffusion::ingest::{ProfileRecord, TweetRecord};
use fi_diffusion::{CommunityGraph, Dataset, NodeId, Result};

fn profile(id: &str) -> ProfileRecord {
    ProfileRecord {
        external_id: id.into(),
        created_at: 0,
        is_private: false,
        klout: Some(40.0),
        peerindex: Some(30.0),
    }
}

fn tweet(id: &str, author: &str, timestamp: i64, retweet_of: Option<&str>) -> TweetRecord {
    TweetRecord {
        tweet_id: id.into(),
        author: author.into(),
        timestamp,
        retweet_of: retweet_of.map(Into::into),
        hashtags: vec![],
        reply_to: None,
    }
}

fn main() -> Result<()> {
    // alice and carol post; bob follows both, dave follows bob
    let names = ["alice", "bob", "carol", "dave"];
    let (g, _) = CommunityGraph::from_follows(
        4,
        [(1, 0), (1, 2), (3, 1)].map(|(a, b)| (NodeId(a), NodeId(b))),
    )?;
    let tweets = vec![
        tweet("t1", "alice", 0, None),
        tweet("t2", "carol", 2, Some("t1")),
        tweet("t3", "bob", 5, Some("t2")),
        tweet("t4", "dave", 9, Some("t3")),
        tweet("t5", "carol", 20, None),
    ];
    let ds = Dataset::from_parts(names.iter().map(|n| profile(n)).collect(), g, tweets)?;

    let log = extract_cascades(&ds, DEFAULT_WINDOW_SECS)?;
    for c in &log.cascades {
        println!(
            "message {} rooted at {}",
            c.message_id,
            ds.external_id(c.root)
        );
        for a in &c.activations {
            let by = a.first_influencer.map(|u| ds.external_id(u)).unwrap_or("-");
            println!(
                "  t={:<3} {:<6} first influencer {by}",
                a.time,
                ds.external_id(a.node)
            );
        }
    }
    let mut text = Vec::new();
    write_cascade_log(&log, &mut text)?;
    print!("{}", String::from_utf8_lossy(&text));
    Ok(())
}
