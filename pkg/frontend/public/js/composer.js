// Message composer state: a pure module so the validation rules are
// testable without a DOM. The server re-validates everything; this layer
// exists so invalid input is blocked before it ever leaves the client.
export const ALPHABET = "ABC012+*";
export const MAX_LENGTH = 8;
export const emptyComposer = { text: "", rejected: null };
/** One keypress. Anything but the 8 symbols and Backspace is blocked. */
export function pressKey(state, key) {
    if (key === "Backspace") {
        return { text: state.text.slice(0, -1), rejected: null };
    }
    if (key === " ") {
        return { ...state, rejected: "spaces are not allowed" };
    }
    if (!ALPHABET.includes(key)) {
        return { ...state, rejected: `"${key}" is not one of ${ALPHABET}` };
    }
    if (state.text.length >= MAX_LENGTH) {
        return { ...state, rejected: `messages are at most ${MAX_LENGTH} symbols` };
    }
    return { text: state.text + key, rejected: null };
}
export function typeText(state, text) {
    let current = state;
    for (const key of text) {
        current = pressKey(current, key);
    }
    return current;
}
export function canSend(state) {
    return state.text.length >= 1 && state.text.length <= MAX_LENGTH;
}
/** Live counter text, e.g. "3/8". */
export function counter(state) {
    return `${state.text.length}/${MAX_LENGTH}`;
}
