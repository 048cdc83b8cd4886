"""Writes the 1,000-post corpus fixture with independently computed expectations.

Outputs (in tests/fixtures):
  posts_1000.jsonl        the dump
  posts_1000.expected     key=value counts computed here
  summary_1000.golden     expected `supportlens summary` output
"""
import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parents[2] / "tests" / "fixtures"
rng = random.Random(2019)

authors = [f"user_{i:03d}" for i in range(180)] + ["[deleted]"]
weights = [1.0 / (1 + i) ** 0.8 for i in range(len(authors))]
start = 1449000000
posts = []
t = start
for i in range(1000):
    t += rng.randint(30, 90000)
    comments = 0 if rng.random() < 0.18 else int(rng.expovariate(1 / 9.0))
    if i % 97 == 0:
        comments = rng.randint(150, 1400)
    posts.append({
        "id": f"t3_{i:05x}",
        "author": rng.choices(authors, weights)[0],
        "created_utc": t,
        "title": rng.choice(["Day %d" % rng.randint(1, 400), "Any tips for sleep?", "Feeling good today",
                             "Relapsed again", "One year clean!", "How long do cravings last?"]),
        "selftext": rng.choice([None, "", "More in the post body."]),
        "num_comments": comments,
        "subreddit": "OpiatesRecovery",
    })

with open(OUT / "posts_1000.jsonl", "w") as f:
    for p in posts:
        f.write(json.dumps(p) + "\n")

users = len({p["author"] for p in posts})
n_comments = sum(p["num_comments"] for p in posts)
zero = sum(1 for p in posts if p["num_comments"] == 0)
lo, hi = posts[0]["created_utc"], posts[-1]["created_utc"]
mid_lo, mid_hi = posts[250]["created_utc"], posts[749]["created_utc"]
mid = [p for p in posts if mid_lo <= p["created_utc"] <= mid_hi]
mid_zero = sum(1 for p in mid if p["num_comments"] == 0)

with open(OUT / "posts_1000.expected", "w") as f:
    f.write(f"users={users}\nposts={len(posts)}\ncomments={n_comments}\n")
    f.write(f"zero_comment_posts={zero}\nwindow_start={lo}\nwindow_end={hi}\n")
    f.write(f"mid_start={mid_lo}\nmid_end={mid_hi}\nmid_posts={len(mid)}\nmid_zero={mid_zero}\n")

rows = [["Attribute", "OpiatesRecovery"],
        ["Number of unique users", f"{users:,}"],
        ["Number of posts", f"{len(posts):,}"],
        ["Number of comments", f"{n_comments:,}"]]
w0 = max(len(r[0]) for r in rows)
w1 = max(len(r[1]) for r in rows)
lines = [rows[0][0].ljust(w0) + "  " + rows[0][1].rjust(w1), "-" * (w0 + 2 + w1)]
lines += [r[0].ljust(w0) + "  " + r[1].rjust(w1) for r in rows[1:]]
lines.append(f"No-comment rate [{lo}, {hi}]: {100.0 * zero / len(posts):.2f}%")
(OUT / "summary_1000.golden").write_text("\n".join(lines) + "\n")
print(users, n_comments, zero)
