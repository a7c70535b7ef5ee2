import { ApiClient } from './api.js';
import { ChatApp } from './ui.js';

const app = new ChatApp(new ApiClient(''));
app.start();
