import { createStudio } from './app';

const root = document.getElementById('studio');
if (root) {
  createStudio(root, {
    fetchJson: (path) => fetch(path).then((r) => r.json()),
  }).catch((err) => {
    root.textContent = `failed to start studio: ${err}`;
  });
}
