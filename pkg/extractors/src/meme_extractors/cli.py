"""CLI: run extraction over an image directory plus a raw JSONL manifest."""

from __future__ import annotations

import logging
import sys

import click

from .encoders import EncoderError, build_suite
from .entries import InputError, KeyMap, read_raw_manifest
from .extract import extract_dataset


@click.command()
@click.option("--images", "images_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--family", default="hashing", show_default=True,
              help="Encoder family: hashing (hermetic) or pretrained (local checkpoints).")
@click.option("--dim", default=768, show_default=True, help="Embedding width for the hashing family.")
@click.option("--keys", "keymap_spec", default=None,
              help="Remap manifest keys, e.g. 'image=image_path,text=caption'.")
@click.option("--default-split", default="train", show_default=True,
              type=click.Choice(["train", "val", "test"]),
              help="Split for entries whose manifest line has no split key.")
def main(images_dir, manifest_path, out_dir, family, dim, keymap_spec, default_split):
    """Extract embedding channels from raw memes into a dataset directory."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        keymap = KeyMap.parse(keymap_spec)
        entries = read_raw_manifest(
            manifest_path, images_dir, keymap, default_split=default_split
        )
        suite = build_suite(family, dim=dim)
        counts = extract_dataset(entries, suite, out_dir)
    except (InputError, EncoderError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(
        f"extracted {counts['written']}/{counts['seen']} entries "
        f"({counts['skipped']} skipped) into {out_dir}"
    )


if __name__ == "__main__":
    main()
