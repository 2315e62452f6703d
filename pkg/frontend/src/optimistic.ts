/** Apply a local update immediately, roll it back if the server call fails. */

export async function optimisticUpdate<T>(
  current: T,
  apply: (value: T) => void,
  next: T,
  action: () => Promise<unknown>,
): Promise<void> {
  const previous = current;
  apply(next);
  try {
    await action();
  } catch (err) {
    apply(previous);
    throw err;
  }
}
