#!/usr/bin/env python3

import anyio

__all__ = [
    "async_readlines",
    "async_write_text",
    "async_write_lines",
]


async def async_readlines(file_path: str, encoding: str = "utf-8") -> list[str]:
    """Read every line of a corpus or embedding file, newlines included.

    Decoding errors are not replaced: a corpus with invalid UTF-8 is a broken
    corpus.
    """
    async with await anyio.open_file(file_path, "r", encoding=encoding) as f:
        return await f.readlines()


async def async_write_text(
    file_path: str,
    content: str,
    mode: str = "w",
    encoding: str = "utf-8",
) -> None:
    """Write `content` with Unix newlines.

    Args:
        file_path: Destination; its directory must exist.
        content: Text to write.
        mode: "w" to replace the file, "a" to append (the run log does).
        encoding: Text encoding, UTF-8 unless told otherwise.
    """
    async with await anyio.open_file(file_path, mode, encoding=encoding, newline="\n") as f:
        await f.write(content)


async def async_write_lines(file_path: str, lines: list[str], mode: str = "w") -> None:
    """Write each string as one newline-terminated line."""
    await async_write_text(file_path, "".join(line + "\n" for line in lines), mode)
