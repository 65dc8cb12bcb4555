import csv
import os
import statistics
import sys
from pathlib import Path

from merosin.orbitlab import BasinLabel
from merosin.serialize import write_json

def analyze_grid(grid_csv):
    """
    Analyze the labels and iteration counts of a grid dump.
    
    Args:
        grid_csv (str): Path to a CSV written by `render --grid-csv`
        
    Returns:
        dict: Statistics about the grid
    """
    labels = {}
    iterations = {}
    pixel_count = 0
    width = height = 0
    
    with open(grid_csv, 'r', encoding='utf-8', newline='') as f:
        for row in csv.DictReader(f):
            pixel_count += 1
            label = row['label']
            labels[label] = labels.get(label, 0) + 1
            iterations.setdefault(label, []).append(int(row['iterations']))
            width = max(width, int(row['i']) + 1)
            height = max(height, int(row['j']) + 1)
    
    stats = {
        "pixel_count": pixel_count,
        "width": width,
        "height": height,
        "labels": labels,
        "iterations": {
            label: {
                "min": min(counts),
                "max": max(counts),
                "mean": statistics.mean(counts),
                "median": statistics.median(counts),
                "stdev": statistics.stdev(counts) if len(counts) > 1 else 0
            }
            for label, counts in iterations.items()
        }
    }
    
    return stats

def print_stats(stats):
    """
    Print statistics in a readable format.
    
    Args:
        stats (dict): Statistics from analyze_grid
    """
    print("\n===== GRID STATISTICS =====")
    print(f"Size: {stats['width']}x{stats['height']} ({stats['pixel_count']} pixels)")
    
    print("\n----- Label Distribution -----")
    for label, count in sorted(stats['labels'].items(), key=lambda x: x[1], reverse=True):
        print(f"{label}: {count} pixels ({count/stats['pixel_count']*100:.2f}%)")
    
    print("\n----- Iterations per Label -----")
    for label, summary in stats['iterations'].items():
        print(f"{label}: min {summary['min']}, max {summary['max']}, "
              f"mean {summary['mean']:.1f}, median {summary['median']:.1f}")
    
    print("\n----- Insights -----")
    undecided = stats['labels'].get(BasinLabel.UNDECIDED.name, 0)
    if undecided:
        print(f"NOTE: {undecided} pixels are Undecided.")
        print("Consider a larger --max-iter, or check whether lambda sits on a parabolic parameter.")
    if stats['labels'].get(BasinLabel.POLE_HIT.name, 0) > 0.01 * stats['pixel_count']:
        print("WARNING: more than 1% of pixels landed on a pole; the window may be centred on a pole.")

if __name__ == "__main__":
    grid_csv = sys.argv[1] if len(sys.argv) > 1 else os.path.join("figures", "basins_9.5.csv")
    
    print(f"Analyzing grid dump {grid_csv}...")
    stats = analyze_grid(grid_csv)
    
    print_stats(stats)
    
    # Save statistics next to the dump
    output_file = Path(grid_csv).with_suffix(".stats.json")
    try:
        write_json(stats, output_file)
        print(f"\nStatistics saved to {output_file}")
    except Exception as e:
        print(f"\nError saving statistics: {str(e)}")
