import pytest

VOCAB_WORDS = """
Translate the following text from English into Italian . : <| im_start im_end
|> user assistant
The developer visited hairdresser because he she needed to update his her
records librarian analyst consulted with knows a lot about books was helpful
la il bibliotecaria bibliotecario governante lavora perché
""".split()


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A saved word-level GPT-2 small enough for CPU smoke tests.

    Weights are randomly initialized under a fixed seed; the model is loaded
    back through the standard AutoModel/AutoTokenizer path like any hub model.
    """
    import torch
    from tokenizers import Tokenizer
    from tokenizers.models import WordLevel
    from tokenizers.pre_tokenizers import Whitespace
    from transformers import GPT2Config, GPT2LMHeadModel, PreTrainedTokenizerFast

    vocab = {w: i for i, w in enumerate(dict.fromkeys(["<unk>", "<eos>",
                                                       *VOCAB_WORDS]))}
    tok = Tokenizer(WordLevel(vocab, unk_token="<unk>"))
    tok.pre_tokenizer = Whitespace()
    fast = PreTrainedTokenizerFast(tokenizer_object=tok, unk_token="<unk>",
                                   eos_token="<eos>")
    torch.manual_seed(0)
    config = GPT2Config(
        vocab_size=len(vocab), n_positions=256, n_embd=32, n_layer=2, n_head=2,
        eos_token_id=vocab["<eos>"], bos_token_id=vocab["<eos>"],
    )
    model = GPT2LMHeadModel(config)
    path = tmp_path_factory.mktemp("tiny-lm")
    model.save_pretrained(path)
    fast.save_pretrained(path)
    return path


@pytest.fixture(scope="session")
def loaded_tiny_model(tiny_model_dir):
    from transformers import AutoModelForCausalLM, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(tiny_model_dir)
    model = AutoModelForCausalLM.from_pretrained(tiny_model_dir,
                                                 attn_implementation="eager")
    return model, tokenizer
