#!/usr/bin/env python3
# Generate a synthetic dataset, load it with full validation, and print
# per-video statistics (shots, scenes, distinct transcript unigrams).

import tempfile
from pathlib import Path

from scenesearch import generate_fixture, load_dataset

root = Path(tempfile.mkdtemp(prefix="scenesearch-demo-"))
manifest = generate_fixture(root, n_videos=3, shots_per_video=40, scenes_per_video=8, seed=42)
print("dataset written under", root)

ds = load_dataset(manifest)
print("\nvideo_id, shots, scenes, unigrams")
for line in ds.format_stats():
    print(line)

video = ds.videos[0].video_id
first_scene = ds.scenes[video][0]
print(f"\nfirst scene of {video}: id={first_scene.scene_id}, shots {first_scene.shot_span}")
for shot in ds.shots[video][:3]:
    print(f"  shot {shot.shot_id}: [{shot.t_start:.1f}, {shot.t_end:.1f})s mid={shot.t_mid:.1f}s")
print("tokens in", video, "->", len(ds.tokens[video]))
print("fc6 feature of shot 0:", ds.fc6[ds.shots[video][0].shot_id].shape)
