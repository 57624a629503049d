# SPDX-License-Identifier: AGPL-3.0-only
import argparse
import contextlib
import hashlib
import os
import os.path as path
import tempfile

import joblib

SEED_BYTES = 8


def derive_seed(*keys):
    """
    Derives a 63-bit seed from ``keys`` (ints and strings). Equal keys always
    give equal seeds, across processes and platforms.
    """
    h = hashlib.blake2b(digest_size=SEED_BYTES)
    for k in keys:
        h.update(str(k).encode("utf-8"))
        h.update(b"\0")
    return int.from_bytes(h.digest(), "little") >> 1


def hash_file(fobj, hashfunc=hashlib.blake2b):
    buf = fobj.read(16 * 1024)
    h = hashfunc()
    while buf:
        h.update(buf)
        buf = fobj.read(16 * 1024)
    return h.digest()


def digest_path(fpath):
    with open(fpath, "rb") as f:
        return hash_file(f).hex()


def write_atomic(fpath, data):
    """
    Writes ``data`` (str or bytes) to ``fpath`` through a temporary file in
    the same directory, so readers never observe a partial file.
    """
    fpath = os.fspath(fpath)
    os.makedirs(path.dirname(fpath) or ".", exist_ok=True)
    mode = "wb" if isinstance(data, (bytes, bytearray)) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.dirname(fpath) or ".",
                               prefix=f".{path.basename(fpath)}.")
    try:
        with os.fdopen(fd, mode) as f:
            f.write(data)
        os.replace(tmp, fpath)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def run_parallel(func, items, jobs=1):
    items = list(items)
    if jobs == 1 or len(items) <= 1:
        return [func(x) for x in items]
    return joblib.Parallel(n_jobs=jobs)(joblib.delayed(func)(x)
                                        for x in items)


class TristateBooleanAction(argparse.Action):
    def __init__(self,
                 option_strings,
                 dest,
                 **kwargs):
        opts = []
        for opt in option_strings:
            if not opt.startswith("--"):
                raise RuntimeError("tristates can only be flags")
            opts.extend([opt, "--no-" + opt[2:]])

        super(TristateBooleanAction, self).__init__(
            option_strings=opts, dest=dest, **kwargs, nargs=0
        )

    def __call__(self, parser, namespace, values, opt=None):
        if opt in self.option_strings:
            setattr(namespace, self.dest, not opt.startswith("--no-"))

    def format_usage(self):
        return " OR ".join(self.option_strings)

