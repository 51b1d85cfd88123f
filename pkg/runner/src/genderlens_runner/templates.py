"""EN->IT prompt templates: a plain zero-shot form and a chat-style wrapper.

Renderings are byte-exact contracts; downstream tooling compares the prompt
text literally, so never touch the whitespace here.
"""

PLAIN = (
    "Translate the following text from English into Italian.\n"
    "English: {source}\n"
    "Italian: "
)

CHAT = (
    "<|im_start|> user\n"
    "Translate the following text from English into Italian.\n"
    "English: {source}\n"
    "Italian: <|im_end|>\n"
    "<|im_start|> assistant\n"
)

STYLES = ("plain", "chat")


def render_prompt(source: str, style: str) -> str:
    if style == "plain":
        return PLAIN.format(source=source)
    if style == "chat":
        return CHAT.format(source=source)
    raise ValueError(f"unknown template style {style!r}")


def split_around_source(style: str) -> tuple[str, str]:
    """The literal text before and after the embedded source sentence."""
    template = PLAIN if style == "plain" else CHAT
    prefix, _, suffix = template.partition("{source}")
    return prefix, suffix
