/**
 * Timed-transcript processing: parse subtitle text, keep the words tagged
 * as nouns, proper nouns or foreign words, lemmatize and lowercase them,
 * and stamp each with its line's start time.
 *
 * Tagging is a deterministic heuristic approximation of a full
 * part-of-speech tagger (closed-class words and obvious verb/adverb/
 * adjective morphology are excluded, capitalized mid-sentence words become
 * proper nouns, everything else defaults to noun, the classic fallback).
 * Foreign words come from an optional user-supplied lexicon. Swap in a real
 * tagger upstream if you have one; the output schema stays the same.
 */

export interface TimedLine {
  /** seconds */
  start: number
  text: string
}

export interface Token {
  video_id: string
  t: number
  surface: string
  lemma: string
  pos: 'NN' | 'NNS' | 'NNP' | 'NNPS' | 'FW'
}

/** SubRip blocks: index line, "HH:MM:SS,mmm --> HH:MM:SS,mmm", text lines. */
export function parseSrt(text: string): TimedLine[] {
  const lines: TimedLine[] = []
  const blocks = text.replace(/\r\n/g, '\n').split(/\n\s*\n/)
  const timing = /(\d{1,2}):(\d{2}):(\d{2})[,.](\d{1,3})\s*-->/
  for (const block of blocks) {
    const rows = block.split('\n').filter(r => r.trim().length > 0)
    if (rows.length === 0) continue
    const timingIdx = rows.findIndex(r => timing.test(r))
    if (timingIdx < 0) continue
    const m = timing.exec(rows[timingIdx])!
    const start =
      3600 * parseInt(m[1], 10) +
      60 * parseInt(m[2], 10) +
      parseInt(m[3], 10) +
      parseInt(m[4].padEnd(3, '0'), 10) / 1000
    const content = rows.slice(timingIdx + 1).join(' ').trim()
    if (content) lines.push({ start, text: content })
  }
  return lines
}

/** Fallback plain format: "<seconds>\t<text>" per line. */
export function parseTimedTsv(text: string): TimedLine[] {
  const lines: TimedLine[] = []
  for (const raw of text.split('\n')) {
    const line = raw.trim()
    if (!line) continue
    const tab = line.indexOf('\t')
    if (tab <= 0) continue
    const start = Number(line.slice(0, tab))
    const content = line.slice(tab + 1).trim()
    if (Number.isFinite(start) && content) lines.push({ start, text: content })
  }
  return lines
}

const STOPWORDS = new Set(
  (
    'a an the this that these those some any no every each either neither ' +
    'i you he she it we they me him her us them my your his its our their mine yours hers ours theirs ' +
    'myself yourself himself herself itself ourselves themselves ' +
    'is am are was were be been being do does did done doing have has had having ' +
    'will would shall should can could may might must ought ' +
    'and or but nor so yet for if then else when while because although though since unless until ' +
    'of in on at by with from to into onto over under above below between among through during ' +
    'about against before after behind beyond within without around across along near ' +
    'not never always often sometimes here there where why how what who whom whose which ' +
    'as than too very just also only even still again once more most much many few little ' +
    'all both half such same other another own out up down off away back ' +
    'yes no now today tomorrow yesterday soon later early late almost quite rather enough ' +
    'one two three four five six seven eight nine ten first second third'
  ).split(/\s+/),
)

// Present participles that are everyday nouns; other -ing words are
// treated as verb forms and skipped.
const ING_NOUNS = new Set([
  'thing', 'king', 'ring', 'spring', 'string', 'wing', 'morning', 'evening',
  'building', 'feeding', 'breeding', 'opening', 'beginning', 'meaning',
  'painting', 'warning', 'living', 'being', 'offspring', 'lightning',
])

// Frequent base-form verbs and plain adjectives/adverbs that the
// default-to-noun rule would otherwise misfile. Checked against the
// lemmatized form, so "dives"/"watches" are caught too. Noun readings of
// these words are sacrificed; that is the cost of tagging without a parser.
const COMMON_VERBS = new Set(
  (
    'be go come make take give get keep let put say tell ask know think see look watch ' +
    'find want need try use work move live eat drink sleep run walk swim fly climb dive ' +
    'hunt chase catch carry bring hold grow die kill fight play win lose start stop begin ' +
    'end turn open close show hide wait stay leave arrive follow lead cross circle gather ' +
    'meet rest feed breed build spin sing call push pull rise fall drop emerge survive ' +
    'travel return reach seem appear become remain happen change protect attack defend'
  ).split(/\s+/),
)

const COMMON_MODIFIERS = new Set(
  (
    'good bad big small large little long short high low old young new lone lonely hungry ' +
    'cold hot warm cool deep shallow dark bright wet dry fast slow strong weak heavy light ' +
    'rich poor full empty early late near far wild tame rare common huge tiny vast great ' +
    'together alone ahead behind forward backward upward downward northern southern eastern western'
  ).split(/\s+/),
)

const IRREGULAR_PLURALS: Record<string, string> = {
  men: 'man', women: 'woman', children: 'child', teeth: 'tooth', feet: 'foot',
  geese: 'goose', mice: 'mouse', lice: 'louse', people: 'person', oxen: 'ox',
  wolves: 'wolf', calves: 'calf', halves: 'half', leaves: 'leaf', lives: 'life',
  knives: 'knife', wives: 'wife', shelves: 'shelf', thieves: 'thief',
  larvae: 'larva', antennae: 'antenna', fungi: 'fungus', cacti: 'cactus',
  species: 'species', series: 'series', fish: 'fish', sheep: 'sheep', deer: 'deer',
}

const UNCOUNTED_S_ENDINGS = /(ss|us|is)$/

/** Singular, lowercased form of a (possibly plural) noun. */
export function lemmatize(word: string): string {
  const w = word.toLowerCase()
  if (w in IRREGULAR_PLURALS) return IRREGULAR_PLURALS[w]
  if (w.length > 3 && w.endsWith('ies')) return w.slice(0, -3) + 'y'
  if (w.length > 4 && w.endsWith('ves')) return w.slice(0, -3) + 'f'
  if (w.length > 3 && /(sses|shes|ches|xes|zes)$/.test(w)) return w.slice(0, -2)
  if (w.length > 3 && w.endsWith('oes')) return w.slice(0, -2)
  if (w.length > 2 && w.endsWith('s') && !UNCOUNTED_S_ENDINGS.test(w)) return w.slice(0, -1)
  return w
}

function isPluralSurface(word: string): boolean {
  const w = word.toLowerCase()
  return lemmatize(w) !== w || w in IRREGULAR_PLURALS
}

export interface TaggerOptions {
  /** Lowercased words to tag FW (foreign word). */
  foreignWords?: Set<string>
}

interface TaggedWord {
  surface: string
  pos: Token['pos']
}

/** Nouns/proper nouns/foreign words of one line, in order. */
export function tagLine(text: string, options: TaggerOptions = {}): TaggedWord[] {
  const foreign = options.foreignWords ?? new Set()
  const out: TaggedWord[] = []
  const words = text.split(/\s+/)
  let sentenceInitial = true
  for (const raw of words) {
    const surface = raw.replace(/^[^A-Za-z]+|[^A-Za-z]+$/g, '')
    const endsSentence = /[.!?]["')\]]?$/.test(raw)
    if (!surface || /\d/.test(raw)) {
      if (endsSentence) sentenceInitial = true
      continue
    }
    const lower = surface.toLowerCase()
    const capitalized = /^[A-Z]/.test(surface)
    if (foreign.has(lower)) {
      out.push({ surface, pos: 'FW' })
    } else if (capitalized && !sentenceInitial) {
      out.push({ surface, pos: isPluralSurface(surface) ? 'NNPS' : 'NNP' })
    } else if (!STOPWORDS.has(lower) && lower.length >= 2 && isNounLike(lower)) {
      out.push({ surface, pos: isPluralSurface(surface) ? 'NNS' : 'NN' })
    }
    sentenceInitial = endsSentence
  }
  return out
}

function isNounLike(lower: string): boolean {
  if (lower.endsWith('ly')) return false // adverb morphology
  if (lower.endsWith('ing') && !ING_NOUNS.has(lower)) return false
  if (lower.endsWith('ed') && lower.length > 4) return false
  if (COMMON_MODIFIERS.has(lower)) return false
  if (COMMON_VERBS.has(lemmatize(lower))) return false
  return true
}

export function tokensFromLines(
  videoId: string,
  lines: TimedLine[],
  options: TaggerOptions = {},
): Token[] {
  const tokens: Token[] = []
  for (const line of lines) {
    for (const { surface, pos } of tagLine(line.text, options)) {
      tokens.push({
        video_id: videoId,
        t: line.start,
        surface,
        lemma: lemmatize(surface),
        pos,
      })
    }
  }
  tokens.sort((a, b) => a.t - b.t || (a.lemma < b.lemma ? -1 : a.lemma > b.lemma ? 1 : 0))
  return tokens
}

export function parseTranscript(text: string): TimedLine[] {
  return /-->/.test(text) ? parseSrt(text) : parseTimedTsv(text)
}
